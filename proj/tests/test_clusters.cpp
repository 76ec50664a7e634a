#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "maglab/clusters.hpp"
#include "maglab/oracles.hpp"

using namespace maglab;

namespace {

std::vector<EigenPair> synthetic_pairs(const std::vector<double>& values) {
  std::vector<EigenPair> out;
  for (size_t i = 0; i < values.size(); ++i) {
    EigenPair p;
    p.value = values[i];
    p.vector = VectorXcd::Zero(values.size());
    p.vector[i] = 1.0;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("sphere clusters: sizes 7, 9, 11 at 0, k+2, 2k+6") {
  const int k = 6;
  const auto op = assemble_sphere(1, k, 7);
  const auto pairs = lowest_eigenpairs(op, 7 + 9 + 11);
  const auto part = detect_clusters(pairs, k, default_gap_factor(ManifoldModel::sphere(1)));
  REQUIRE(part.clusters.size() == 3);
  REQUIRE(part.clusters[0].size() == 7);
  REQUIRE(part.clusters[1].size() == 9);
  REQUIRE(part.clusters[2].size() == 11);
  REQUIRE(part.clusters[0].center() == 0.0);
  REQUIRE(part.clusters[1].center() == Catch::Approx(k + 2.0));
  REQUIRE(part.clusters[2].center() == Catch::Approx(2.0 * k + 6.0));
  REQUIRE(part.epsilon0 == 0.0);
}

TEST_CASE("torus clusters at k=8: two Landau groups of size 8") {
  const auto model = ManifoldModel::torus(1.0, 1.0, two_pi);
  const int k = 8;
  const auto op = assemble_torus(model, build_gauge(model, k, {48, 48}));
  const auto pairs = lowest_eigenpairs(op, 18);
  const auto part = detect_clusters(pairs, k, default_gap_factor(model));
  REQUIRE(part.clusters.size() >= 2);
  REQUIRE(part.clusters[0].size() == 8);
  REQUIRE(part.clusters[1].size() >= 8);
  const double oracle = landau_levels(1, k, two_pi, 1)[1].value;  // 4 pi k
  REQUIRE(part.clusters[1].eigenvalues[0] == Catch::Approx(oracle).epsilon(0.03));
  REQUIRE(part.epsilon0 < 0.05 * oracle);
}

TEST_CASE("single tight cluster input") {
  const auto pairs = synthetic_pairs({0.0, 0.0, 0.0});
  const auto part = detect_clusters(pairs, 5, 1.0);
  REQUIRE(part.clusters.size() == 1);
  REQUIRE(part.clusters[0].lo == 0.0);
  REQUIRE(part.clusters[0].hi == 0.0);
  REQUIRE(part.epsilon0 == 0.0);
}

TEST_CASE("gapless wide input raises ClusterUndetected") {
  std::vector<double> values;
  for (int i = 0; i < 30; ++i) values.push_back(0.9 * i);  // spacing below threshold 1*k=1...
  REQUIRE_THROWS_AS(detect_clusters(synthetic_pairs(values), 1, 1.0), ClusterUndetected);
}

TEST_CASE("detect_clusters input validation") {
  REQUIRE_THROWS_AS(detect_clusters({}, 1, 1.0), InvalidInput);
  REQUIRE_THROWS_AS(detect_clusters(synthetic_pairs({1.0, 0.0}), 1, 1.0), InvalidInput);
  REQUIRE_THROWS_AS(detect_clusters(synthetic_pairs({0.0, 1.0}), 1, 0.0), InvalidInput);
}

TEST_CASE("drift scan on the sphere is exact") {
  const auto model = ManifoldModel::sphere(1);
  const std::vector<int> ks{4, 6, 8, 10, 12};
  const auto rows = drift_scan(model, ks, {});
  REQUIRE(rows.size() == ks.size());
  for (size_t i = 0; i < ks.size(); ++i) {
    const int k = ks[i];
    REQUIRE(rows[i].d_k == k + 1);
    REQUIRE(rows[i].eps_k == 0.0);
    REQUIRE(rows[i].M_k == Catch::Approx((k + 2.0) / k).margin(1e-12));
    REQUIRE(rows[i].max_residual == 0.0);
  }
}

TEST_CASE("drift scan on the constant torus tracks the Landau gap") {
  const auto model = ManifoldModel::torus(1.0, 1.0, two_pi);
  const std::vector<int> ks{4, 6};
  const auto rows = drift_scan(model, ks, {32, 32});
  for (size_t i = 0; i < ks.size(); ++i) {
    REQUIRE(rows[i].d_k == ks[i]);  // d_k = N*k
    REQUIRE(rows[i].M_k == Catch::Approx(4.0 * pi).epsilon(0.10));
    REQUIRE(rows[i].eps_k < 0.05 * 4.0 * pi * ks[i]);
    REQUIRE(rows[i].max_residual <= 1e-8);
  }
}

TEST_CASE("drift scan counts the perturbed-torus index") {
  const auto model = ManifoldModel::torus(1.0, 1.0, two_pi, 0.3);
  const std::vector<int> ks{4, 5};
  const auto rows = drift_scan(model, ks, {32, 32});
  for (size_t i = 0; i < ks.size(); ++i) {
    REQUIRE(rows[i].d_k == ks[i]);
    REQUIRE(rows[i].M_k > 0.5 * gap_constants(model).M);
  }
}

TEST_CASE("drift scan validates its k list") {
  const auto model = ManifoldModel::sphere(1);
  const std::vector<int> bad{6, 4};
  REQUIRE_THROWS_AS(drift_scan(model, bad, {}), InvalidInput);
}
