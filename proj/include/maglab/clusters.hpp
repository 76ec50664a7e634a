#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/lanczos.hpp"
#include "maglab/operators.hpp"
#include "maglab/symbol.hpp"

namespace maglab {

/// A contiguous eigenvalue group of Box_k.  Eigenvectors are stored
/// l2-orthonormal as columns; on the torus grid the quadrature-orthonormal
/// sections are these columns divided by sqrt(h1*h2).
struct SpectralCluster {
  int k = 0;
  int nu = 0;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  Eigen::MatrixXcd vectors;
  double lo = 0.0;
  double hi = 0.0;

  long size() const { return static_cast<long>(eigenvalues.size()); }
  double center() const {
    double s = 0.0;
    for (double v : eigenvalues) s += v;
    return s / eigenvalues.size();
  }
};

struct ClusterPartition {
  std::vector<SpectralCluster> clusters;
  double epsilon0 = 0.0;       // max |lambda| over cluster 0
  double gap_threshold = 0.0;  // absolute split threshold used
};

/// Half of the symbol-predicted first gap per unit k: splitting threshold
/// gap_factor * k with gap_factor = 0.5 * (2 * min kappa).
inline double default_gap_factor(const ManifoldModel& model) { return min_kappa(model); }

/// Split sorted eigenpairs at gaps wider than gap_factor * k.  The first
/// cluster must itself be narrower than the threshold, otherwise no gap of
/// the required size exists among the computed eigenvalues.
inline ClusterPartition detect_clusters(std::span<const EigenPair> pairs, int k,
                                        double gap_factor) {
  if (pairs.empty()) throw InvalidInput("detect_clusters: no eigenpairs");
  if (!(gap_factor > 0.0)) throw InvalidInput("detect_clusters: gap_factor must be positive");
  for (size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].value < pairs[i - 1].value - 1e-12)
      throw InvalidInput("detect_clusters: eigenvalues must be sorted ascending");

  ClusterPartition part;
  part.gap_threshold = gap_factor * std::max(1, k);

  std::vector<size_t> starts{0};
  for (size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].value - pairs[i - 1].value > part.gap_threshold) starts.push_back(i);
  starts.push_back(pairs.size());

  const long M = pairs[0].vector.size();
  for (size_t c = 0; c + 1 < starts.size(); ++c) {
    SpectralCluster cl;
    cl.k = k;
    cl.nu = static_cast<int>(c);
    const size_t a = starts[c], b = starts[c + 1];
    cl.vectors.resize(M, b - a);
    for (size_t i = a; i < b; ++i) {
      cl.eigenvalues.push_back(pairs[i].value);
      cl.residuals.push_back(pairs[i].residual);
      cl.vectors.col(i - a) = pairs[i].vector;
    }
    cl.lo = cl.eigenvalues.front();
    cl.hi = cl.eigenvalues.back();
    part.clusters.push_back(std::move(cl));
  }

  const auto& c0 = part.clusters.front();
  if (c0.hi - c0.lo > part.gap_threshold)
    throw ClusterUndetected(
        "detect_clusters: no gap of the required size found (first group spans " +
        std::to_string(c0.hi - c0.lo) + " > threshold " +
        std::to_string(part.gap_threshold) + "); request more eigenpairs");
  part.epsilon0 = std::max(std::abs(c0.lo), std::abs(c0.hi));
  return part;
}

/// One row of the spectral-drift table.
struct DriftRow {
  int k = 0;
  long d_k = 0;        // dimension of the low cluster
  double eps_k = 0.0;  // max |lambda| over cluster 0
  double M_k = 0.0;    // lambda_{d_k + 1} / k
  double max_residual = 0.0;  // max residual / max(1, |lambda|)
};

namespace detail {

inline DiscreteOperator drift_operator(const ManifoldModel& model, int k, GridDims grid,
                                       int count_hint) {
  if (model.is_torus()) return assemble_torus(model, build_gauge(model, k, grid));
  // Sphere: size the exact diagonal basis so that count < M/4 holds.
  int nu_max = 2;
  while ((nu_max + 1) * (static_cast<long>(model.N) * k + nu_max + 1) <= 4L * count_hint)
    ++nu_max;
  return assemble_sphere(model.N, k, nu_max);
}

}  // namespace detail

/// Scan k values at a fixed grid policy, reporting the low-cluster dimension
/// d_k, its radius eps_k, and the rescaled continuation point
/// M_k = lambda_{d_k+1}/k.
inline std::vector<DriftRow> drift_scan(const ManifoldModel& model, std::span<const int> ks,
                                        GridDims grid, const LanczosOptions& opts = {}) {
  if (ks.empty()) throw InvalidInput("drift_scan: no k values");
  for (size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw InvalidInput("drift_scan: k values must be ascending");

  std::vector<DriftRow> rows;
  for (int k : ks) {
    const long d_pred = predicted_dimension(model, k);
    int count = static_cast<int>(d_pred + std::max<long>(4, d_pred / 3));
    const double gap_factor = default_gap_factor(model);
    for (int attempt = 0;; ++attempt) {
      const auto op = detail::drift_operator(model, k, grid, count);
      const auto pairs = lowest_eigenpairs(op, count, opts);
      try {
        const auto part = detect_clusters(pairs, k, gap_factor);
        if (part.clusters.size() < 2)
          throw ClusterUndetected("drift_scan: need eigenvalues beyond the low cluster");
        DriftRow row;
        row.k = k;
        row.d_k = part.clusters[0].size();
        row.eps_k = part.epsilon0;
        row.M_k = part.clusters[1].lo / k;
        for (const auto& p : pairs)
          row.max_residual =
              std::max(row.max_residual, p.residual / std::max(1.0, std::abs(p.value)));
        rows.push_back(row);
        break;
      } catch (const ClusterUndetected&) {
        if (attempt >= 1) throw;
        count *= 2;  // request more eigenpairs once, then give up
      }
    }
  }
  return rows;
}

}  // namespace maglab
