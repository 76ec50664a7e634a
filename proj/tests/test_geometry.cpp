#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "maglab/geometry.hpp"

using namespace maglab;

namespace {

Mat2 random_spd(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Mat2 a;
  a << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
  return a.transpose() * a + 0.2 * Mat2::Identity();
}

Mat2 antisym(double b) {
  Mat2 w;
  w << 0.0, b, -b, 0.0;
  return w;
}

}  // namespace

TEST_CASE("compute_K identity metric copies omega") {
  const Mat2 w = antisym(4.2);
  REQUIRE((compute_K(Mat2::Identity(), w) - w).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("compute_K scaled metric") {
  Mat2 g = 4.0 * Mat2::Identity();
  const Mat2 K = compute_K(g, antisym(1.0));
  REQUIRE(K(0, 1) == Catch::Approx(0.25).margin(1e-14));
  REQUIRE(K(1, 0) == Catch::Approx(-0.25).margin(1e-14));
  REQUIRE(std::abs(K(0, 0)) < 1e-14);
}

TEST_CASE("compute_K skew-adjointness for random SPD metrics") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.3, 3.0);
  for (int trial = 0; trial < 64; ++trial) {
    const Mat2 g = random_spd(rng);
    const Mat2 w = antisym(unif(rng));
    const Mat2 K = compute_K(g, w);
    const Mat2 gK = g * K;
    REQUIRE((gK.transpose() + gK).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((g * K - w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("compute_K rejects invalid inputs") {
  Mat2 notspd;
  notspd << 1.0, 0.0, 0.0, -1.0;
  REQUIRE_THROWS_AS(compute_K(notspd, antisym(1.0)), InvalidInput);
  Mat2 notsym;
  notsym << 1.0, 0.5, -0.5, 1.0;
  REQUIRE_THROWS_AS(compute_K(notsym, antisym(1.0)), InvalidInput);
  Mat2 notanti;
  notanti << 0.0, 1.0, 1.0, 0.0;
  REQUIRE_THROWS_AS(compute_K(Mat2::Identity(), notanti), InvalidInput);
}

TEST_CASE("kappa_spectrum rotation generators") {
  auto k1 = kappa_spectrum(antisym(two_pi));
  REQUIRE(k1.size() == 1);
  REQUIRE(k1[0] == Catch::Approx(two_pi).epsilon(1e-12));
  auto k2 = kappa_spectrum(antisym(0.25));
  REQUIRE(k2[0] == Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("kappa_spectrum rejects real eigenvalues") {
  Mat2 real_spec;
  real_spec << 1.0, 0.0, 0.0, -1.0;
  REQUIRE_THROWS_AS(kappa_spectrum(real_spec), DegenerateField);
}

TEST_CASE("closed-form kappa agrees with generic eigensolve on perturbed torus") {
  const auto model = ManifoldModel::torus(1.0, 1.0, two_pi, 0.3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 32; ++trial) {
    const double x = unif(rng), y = unif(rng);
    const auto fg = field_geometry_at(model, x, y);
    REQUIRE(fg.kappa == Catch::Approx(model.field(x, y)).epsilon(1e-12));
    const auto generic = kappa_spectrum(fg.K);
    REQUIRE(fg.kappa == Catch::Approx(generic[0]).epsilon(1e-12));
  }
}

TEST_CASE("trace_plus and almost_complex on scalar blocks") {
  const double b = 1.7;
  REQUIRE(trace_plus(antisym(b)) == Catch::Approx(b).epsilon(1e-12));
  const Mat2 J = almost_complex(antisym(b));
  REQUIRE(J(0, 1) == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(J(1, 0) == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("sphere pointwise package") {
  const auto model = ManifoldModel::sphere(5);
  const auto fg = field_geometry_at(model);
  REQUIRE(fg.kappa == Catch::Approx(2.5).epsilon(1e-14));
  REQUIRE(fg.trace_plus == Catch::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("pointwise invariants on a grid") {
  const auto model = ManifoldModel::torus(1.0, 1.5, 3.0 * two_pi / 1.5, 0.4);
  const int n = 16;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto fg = field_geometry_at(model, i * model.L1 / n, j * model.L2 / n);
      REQUIRE((fg.g * fg.K - fg.omega).cwiseAbs().maxCoeff() <= 1e-12);
      const Mat2 gK = fg.g * fg.K;
      REQUIRE((gK.transpose() + gK).cwiseAbs().maxCoeff() <= 1e-12);
      REQUIRE(std::abs(fg.trace_plus - fg.kappa) <= 1e-12);
      REQUIRE((fg.J * fg.J + Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
      // metric compatibility g(Ju, Jv) = g(u, v)
      REQUIRE((fg.J.transpose() * fg.g * fg.J - fg.g).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("chern_flux integers") {
  REQUIRE(chern_flux(ManifoldModel::torus(1.0, 1.0, two_pi)) == 1);
  REQUIRE(chern_flux(ManifoldModel::torus(1.0, 1.0, 3.0 * two_pi, 0.3)) == 3);
  REQUIRE(chern_flux(ManifoldModel::sphere(5)) == 5);
}

TEST_CASE("chern_flux invariant under quadrature refinement") {
  const auto model = ManifoldModel::torus(2.0, 1.0, two_pi, 0.7);
  for (int panels : {8, 16, 32, 64}) REQUIRE(chern_flux(model, panels) == 2);
}

TEST_CASE("chern_flux rejects non-integral flux") {
  REQUIRE_THROWS_AS(chern_flux(ManifoldModel::torus(1.0, 1.0, 1.5 * two_pi)), FluxNotIntegral);
}

TEST_CASE("model validation") {
  REQUIRE_THROWS_AS(ManifoldModel::torus(1.0, 1.0, -two_pi), InvalidInput);
  REQUIRE_THROWS_AS(ManifoldModel::torus(1.0, 1.0, two_pi, 1.5), InvalidInput);
  REQUIRE_THROWS_AS(ManifoldModel::sphere(0), InvalidInput);
}

TEST_CASE("torus distance wraps") {
  const auto model = ManifoldModel::torus(1.0, 1.0, two_pi);
  REQUIRE(distance(model, {0.0, 0.0}, {0.9, 0.0}) == Catch::Approx(0.1).margin(1e-14));
  REQUIRE(distance(model, {0.0, 0.0}, {0.5, 0.5}) ==
          Catch::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("sphere distance antipodes") {
  const auto model = ManifoldModel::sphere(1);
  REQUIRE(distance(model, {0.0, 0.0}, {pi, 0.0}) == Catch::Approx(pi).epsilon(1e-14));
}

TEST_CASE("distance symmetry and triangle inequality") {
  const auto model = ManifoldModel::torus(1.0, 2.0, two_pi / 2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uy(0.0, 2.0);
  for (int trial = 0; trial < 64; ++trial) {
    const Vec2 a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)}, c{ux(rng), uy(rng)};
    const double ab = distance(model, a, b);
    REQUIRE(ab == Catch::Approx(distance(model, b, a)).margin(1e-14));
    REQUIRE(ab <= distance(model, a, c) + distance(model, c, b) + 1e-12);
  }
}
