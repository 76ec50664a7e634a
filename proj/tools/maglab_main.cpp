// Placeholder CLI entry point; replaced as the runner lands.
int main() { return 0; }
