#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "maglab/errors.hpp"

namespace maglab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

enum class ModelKind { torus, sphere };

/// Geometric scenario: a flat rectangular torus carrying a positive field
/// density B(x,y), or the round unit sphere with a monopole of charge N
/// (omega = (N/2) * area form).  The torus field is either constant or the
/// zero-mean modulation family B0*(1 + eps*cos(2*pi*x/L1)*cos(2*pi*y/L2)).
struct ManifoldModel {
  ModelKind kind = ModelKind::torus;
  double L1 = 1.0;
  double L2 = 1.0;
  double B0 = two_pi;
  double eps = 0.0;
  int N = 1;  // sphere monopole charge

  static ManifoldModel torus(double L1, double L2, double B0, double eps = 0.0) {
    if (!(L1 > 0.0) || !(L2 > 0.0)) throw InvalidInput("torus: side lengths must be positive");
    if (!(B0 > 0.0)) throw InvalidInput("torus: B0 must be positive");
    if (!(std::abs(eps) < 1.0)) throw InvalidInput("torus: |eps| < 1 required to keep B positive");
    ManifoldModel m;
    m.kind = ModelKind::torus;
    m.L1 = L1;
    m.L2 = L2;
    m.B0 = B0;
    m.eps = eps;
    return m;
  }

  static ManifoldModel sphere(int N) {
    if (N < 1) throw InvalidInput("sphere: monopole charge N must be >= 1");
    ManifoldModel m;
    m.kind = ModelKind::sphere;
    m.N = N;
    return m;
  }

  bool is_torus() const { return kind == ModelKind::torus; }

  /// Field density at a torus point.
  double field(double x, double y) const {
    return B0 * (1.0 + eps * std::cos(two_pi * x / L1) * std::cos(two_pi * y / L2));
  }

  double volume() const { return is_torus() ? L1 * L2 : 4.0 * pi; }
};

/// Pointwise package (g, omega, K, kappa, Tr+K, J) at one point, with the
/// metric in an orthonormal frame (Euclidean on the torus, round-sphere
/// frame): K = g^{-1} omega, kappa = pf(omega)/sqrt(det g).
struct FieldGeometry {
  Mat2 g;
  Mat2 omega;
  Mat2 K;
  Mat2 J;
  double kappa = 0.0;
  double trace_plus = 0.0;
};

namespace detail {

inline bool is_symmetric(const Mat2& m, double tol) {
  return std::abs(m(0, 1) - m(1, 0)) <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

inline bool is_antisymmetric(const Mat2& m, double tol) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return std::abs(m(0, 0)) <= tol * scale && std::abs(m(1, 1)) <= tol * scale &&
         std::abs(m(0, 1) + m(1, 0)) <= tol * scale;
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirror
// for the negative nodes).
struct GaussLegendre16 {
  static constexpr std::array<double, 8> x = {
      0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
      0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
  static constexpr std::array<double, 8> w = {
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
};

/// Integrate f over [a,b] x [c,d] with a tensor 16x16 Gauss-Legendre rule.
template <class F>
double gauss2d(F&& f, double a, double b, double c, double d) {
  using GL = GaussLegendre16;
  const double mx = 0.5 * (a + b), rx = 0.5 * (b - a);
  const double my = 0.5 * (c + d), ry = 0.5 * (d - c);
  double nodes_x[16], weights_x[16], nodes_y[16], weights_y[16];
  for (int i = 0; i < 8; ++i) {
    nodes_x[i] = mx - rx * GL::x[i];
    nodes_x[15 - i] = mx + rx * GL::x[i];
    weights_x[i] = weights_x[15 - i] = GL::w[i];
    nodes_y[i] = my - ry * GL::x[i];
    nodes_y[15 - i] = my + ry * GL::x[i];
    weights_y[i] = weights_y[15 - i] = GL::w[i];
  }
  double sum = 0.0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) sum += weights_x[i] * weights_y[j] * f(nodes_x[i], nodes_y[j]);
  return sum * rx * ry;
}

}  // namespace detail

/// Solve g*K = omega for the bundle map K.  g must be symmetric positive
/// definite and omega antisymmetric; the result is skew-adjoint w.r.t. g.
inline Mat2 compute_K(const Mat2& g, const Mat2& w) {
  if (!detail::is_symmetric(g, 1e-12)) throw InvalidInput("compute_K: metric not symmetric");
  if (!detail::is_antisymmetric(w, 1e-12))
    throw InvalidInput("compute_K: omega matrix not antisymmetric");
  Eigen::LLT<Mat2> llt(g);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("compute_K: metric not positive definite");
  return llt.solve(w);
}

/// Positive frequencies kappa_j of K (eigenvalues are +-i*kappa_j), sorted
/// ascending.  Generic eigensolver path; the closed 2x2 form lives in
/// field_geometry_at.
inline std::vector<double> kappa_spectrum(const Mat2& K) {
  Eigen::EigenSolver<Mat2> es(K, /*computeEigenvectors=*/false);
  const auto ev = es.eigenvalues();
  const double scale = 1.0 + K.cwiseAbs().maxCoeff();
  std::vector<double> kappas;
  for (int i = 0; i < 2; ++i) {
    if (std::abs(ev[i].imag()) <= 1e-10 * scale)
      throw DegenerateField("kappa_spectrum: K has a (numerically) real eigenvalue");
    if (ev[i].imag() > 0.0) kappas.push_back(ev[i].imag());
  }
  std::sort(kappas.begin(), kappas.end());
  if (kappas.empty()) throw DegenerateField("kappa_spectrum: no positive frequency found");
  return kappas;
}

/// Tr+K = sum of the positive frequencies of K.
inline double trace_plus(const Mat2& K) {
  const auto kappas = kappa_spectrum(K);
  double sum = 0.0;
  for (double kj : kappas) sum += kj;
  return sum;
}

/// Almost-complex structure J = K * (K^T K)^{-1/2}; satisfies J^2 = -I.
inline Mat2 almost_complex(const Mat2& K) {
  kappa_spectrum(K);  // validates non-degeneracy
  Eigen::SelfAdjointEigenSolver<Mat2> es(K.transpose() * K);
  return K * es.operatorInverseSqrt();
}

/// Pointwise field geometry.  Torus: Euclidean metric, omega = B(x,y) dx^dy.
/// Sphere: round metric in an orthonormal frame, omega = (N/2) dA; the point
/// argument is ignored since the package is frame-constant.
inline FieldGeometry field_geometry_at(const ManifoldModel& model, double x = 0.0,
                                       double y = 0.0) {
  FieldGeometry fg;
  fg.g = Mat2::Identity();
  const double b = model.is_torus() ? model.field(x, y) : 0.5 * model.N;
  if (!(b > 0.0)) throw DegenerateField("field_geometry_at: omega vanishes at this point");
  fg.omega << 0.0, b, -b, 0.0;
  fg.K = compute_K(fg.g, fg.omega);
  // Closed form for 2x2: kappa = pf(omega)/sqrt(det g).
  fg.kappa = b / std::sqrt(fg.g.determinant());
  fg.trace_plus = fg.kappa;
  fg.J = almost_complex(fg.K);
  return fg;
}

inline double min_kappa(const ManifoldModel& model) {
  return model.is_torus() ? model.B0 * (1.0 - std::abs(model.eps)) : 0.5 * model.N;
}

inline double max_kappa(const ManifoldModel& model) {
  return model.is_torus() ? model.B0 * (1.0 + std::abs(model.eps)) : 0.5 * model.N;
}

/// Total flux integer round(int omega / 2*pi); fails hard when the flux is
/// not integral.  Torus flux is evaluated by panelled Gauss-Legendre
/// quadrature; the sphere is integral by construction.
inline int chern_flux(const ManifoldModel& model, int panels = 32) {
  if (!model.is_torus()) return model.N;
  if (panels < 1) throw InvalidInput("chern_flux: panels must be >= 1");
  const double hx = model.L1 / panels, hy = model.L2 / panels;
  double flux = 0.0;
  for (int i = 0; i < panels; ++i)
    for (int j = 0; j < panels; ++j)
      flux += detail::gauss2d([&](double x, double y) { return model.field(x, y); }, i * hx,
                              (i + 1) * hx, j * hy, (j + 1) * hy);
  const double ratio = flux / two_pi;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-8)
    throw FluxNotIntegral("chern_flux: total flux / 2*pi = " + std::to_string(ratio) +
                          " is not an integer");
  return static_cast<int>(rounded);
}

/// Riemannian distance.  Torus points are (x, y); sphere points are
/// (colatitude, longitude) on the unit sphere.
inline double distance(const ManifoldModel& model, const Vec2& p, const Vec2& q) {
  if (model.is_torus()) {
    double dx = std::abs(p.x() - q.x());
    double dy = std::abs(p.y() - q.y());
    dx = std::fmod(dx, model.L1);
    dy = std::fmod(dy, model.L2);
    dx = std::min(dx, model.L1 - dx);
    dy = std::min(dy, model.L2 - dy);
    return std::hypot(dx, dy);
  }
  const double c = std::cos(p.x()) * std::cos(q.x()) +
                   std::sin(p.x()) * std::sin(q.x()) * std::cos(p.y() - q.y());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace maglab
