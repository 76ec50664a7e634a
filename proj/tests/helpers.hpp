#pragma once

#include <Eigen/Dense>
#include <random>

#include "maglab/clusters.hpp"
#include "maglab/operators.hpp"
#include "maglab/projector.hpp"

namespace maglab::testing {

/// Solve, cluster, and assemble Pi_k for a torus model.
inline ProjectorKernel make_kernel(const ManifoldModel& model, int k, GridDims grid,
                                   const LanczosOptions& opts = {}) {
  const auto op = assemble_torus(model, build_gauge(model, k, grid));
  const long d = predicted_dimension(model, k);
  const auto pairs = lowest_eigenpairs(op, static_cast<int>(d + 4), opts);
  const auto part = detect_clusters(pairs, k, default_gap_factor(model));
  return assemble_projector(part.clusters[0], model, grid);
}

inline Eigen::MatrixXcd to_dense(const DiscreteOperator& op) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(op.M, op.M);
  for (long r = 0; r < op.M; ++r)
    for (long p = op.row_ptr[r]; p < op.row_ptr[r + 1]; ++p) d(r, op.col_idx[p]) += op.vals[p];
  return d;
}

inline Eigen::VectorXd dense_spectrum(const DiscreteOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(op), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace maglab::testing
