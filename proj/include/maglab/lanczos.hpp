#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/operators.hpp"

namespace maglab {

struct EigenPair {
  double value = 0.0;
  VectorXcd vector;
  double residual = 0.0;
};

enum class SolverMode { automatic, plain, shift_invert };

/// Options for the block Lanczos eigensolver.  All start vectors are drawn
/// from a generator with the fixed documented seed, so runs are reproducible.
struct LanczosOptions {
  double tol = 1e-9;          // residual <= tol * max(1, |lambda|)
  int max_basis = 200;        // Krylov basis cap before a thick restart
  int block = 4;              // expansion block size
  int max_cycles = 150;       // Rayleigh-Ritz cycles per pass
  int max_passes = 24;        // fresh-start passes (handles degeneracy)
  std::uint64_t seed = 0x6d61676c6162ULL;
  SolverMode mode = SolverMode::automatic;
  std::optional<double> sigma;  // shift-invert shift; default: below spectrum
};

namespace detail {

using Eigen::MatrixXcd;

enum class TargetOrder { smallest_value, largest_value, largest_abs };

inline std::vector<int> ritz_order(const Eigen::VectorXd& theta, TargetOrder ord) {
  std::vector<int> idx(theta.size());
  std::iota(idx.begin(), idx.end(), 0);
  switch (ord) {
    case TargetOrder::smallest_value:
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return theta[a] < theta[b]; });
      break;
    case TargetOrder::largest_value:
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return theta[a] > theta[b]; });
      break;
    case TargetOrder::largest_abs:
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return std::abs(theta[a]) > std::abs(theta[b]); });
      break;
  }
  return idx;
}

struct KrylovWorkspace {
  MatrixXcd V, W;  // basis and operator images, M x capacity
  MatrixXcd B;     // projected operator, capacity x capacity
  int m = 0;       // columns in use
};

/// Generic deflated block Rayleigh-Ritz driver.  `apply` is the iterated
/// operator (A itself, or a shifted inverse); `certify` maps a normalized
/// Ritz vector to (lambda, residual) of the original operator; `metric`
/// orders final eigenvalues (lambda for lowest, |lambda - sigma| for near).
class KrylovSolver {
 public:
  KrylovSolver(long M, std::function<MatrixXcd(const MatrixXcd&)> apply,
               std::function<std::pair<double, double>(const VectorXcd&)> certify,
               TargetOrder order, std::function<double(double)> metric,
               const LanczosOptions& opts)
      : M_(M), apply_(std::move(apply)), certify_(std::move(certify)), order_(order),
        metric_(std::move(metric)), opts_(opts), rng_(opts.seed) {}

  std::vector<EigenPair> solve(int count) {
    const int cap = std::min<long>(opts_.max_basis + opts_.block, M_);
    ws_.V.resize(M_, cap);
    ws_.W.resize(M_, cap);
    ws_.B = MatrixXcd::Zero(cap, cap);
    vlock_.resize(M_, count + 8);

    int stale_passes = 0;
    for (int pass = 0; pass < opts_.max_passes; ++pass) {
      const int need = count - static_cast<int>(locked_.size());
      if (need <= 0) {
        if (!verification_pass(count)) break;  // nothing missed: done
        continue;
      }
      if (run_pass(need, opts_.max_cycles))
        stale_passes = 0;
      else if (++stale_passes >= 2)
        throw SolverFailure("eigensolver: no progress after repeated passes",
                            best_residuals_);
    }
    if (static_cast<int>(locked_.size()) < count)
      throw SolverFailure("eigensolver: pass budget exhausted", best_residuals_);

    std::stable_sort(locked_.begin(), locked_.end(), [&](const auto& a, const auto& b) {
      return metric_(a.value) < metric_(b.value);
    });
    locked_.resize(count);
    return std::move(locked_);
  }

 private:
  long M_;
  std::function<MatrixXcd(const MatrixXcd&)> apply_;
  std::function<std::pair<double, double>(const VectorXcd&)> certify_;
  TargetOrder order_;
  std::function<double(double)> metric_;
  LanczosOptions opts_;
  std::mt19937_64 rng_;
  KrylovWorkspace ws_;
  MatrixXcd vlock_;
  int nlock_ = 0;
  std::vector<EigenPair> locked_;
  std::vector<double> best_residuals_;

  VectorXcd random_vector() {
    std::normal_distribution<double> gauss;
    VectorXcd v(M_);
    for (long i = 0; i < M_; ++i) v[i] = Complex{gauss(rng_), gauss(rng_)};
    return v;
  }

  void dgks(Eigen::Ref<MatrixXcd> X) const {
    for (int sweep = 0; sweep < 2; ++sweep) {
      if (nlock_ > 0) {
        auto Q = vlock_.leftCols(nlock_);
        X.noalias() -= Q * (Q.adjoint() * X);
      }
      if (ws_.m > 0) {
        auto Q = ws_.V.leftCols(ws_.m);
        X.noalias() -= Q * (Q.adjoint() * X);
      }
    }
  }

  /// Orthonormalize `cols` new directions against locked + basis + each
  /// other; collapsed columns are refilled with random draws.
  MatrixXcd prepare_block(MatrixXcd seedcols, int cols) {
    MatrixXcd X(M_, cols);
    int built = 0;
    const int provided = static_cast<int>(seedcols.cols());
    int next_seed = 0;
    int attempts = 0;
    while (built < cols && attempts < 8 * cols) {
      VectorXcd v = (next_seed < provided) ? VectorXcd(seedcols.col(next_seed++))
                                           : random_vector();
      ++attempts;
      const double norm0 = v.norm();
      if (!(norm0 > 0.0)) continue;
      v /= norm0;  // tiny correction seeds still carry the needed direction
      dgks(v);
      if (built > 0) {
        auto Q = X.leftCols(built);
        v.noalias() -= Q * (Q.adjoint() * v);
        v.noalias() -= Q * (Q.adjoint() * v);
      }
      const double norm = v.norm();
      if (norm < 1e-10) continue;  // collapsed into the span; try random
      X.col(built) = v / norm;
      ++built;
    }
    return X.leftCols(built);
  }

  void lock(double value, VectorXcd y, double residual) {
    if (nlock_ == vlock_.cols()) vlock_.conservativeResize(Eigen::NoChange, nlock_ + 8);
    // polish orthogonality against previously locked vectors
    if (nlock_ > 0) {
      auto Q = vlock_.leftCols(nlock_);
      y.noalias() -= Q * (Q.adjoint() * y);
      y.normalize();
    }
    vlock_.col(nlock_++) = y;
    locked_.push_back({value, std::move(y), residual});
  }

  void append_block(const MatrixXcd& X) {
    const int bx = static_cast<int>(X.cols());
    const MatrixXcd WX = apply_(X);
    ws_.V.middleCols(ws_.m, bx) = X;
    ws_.W.middleCols(ws_.m, bx) = WX;
    if (ws_.m > 0) {
      const MatrixXcd C = ws_.V.leftCols(ws_.m).adjoint() * WX;
      ws_.B.block(0, ws_.m, ws_.m, bx) = C;
      ws_.B.block(ws_.m, 0, bx, ws_.m) = C.adjoint();
    }
    MatrixXcd D = X.adjoint() * WX;
    ws_.B.block(ws_.m, ws_.m, bx, bx) = 0.5 * (D + D.adjoint());
    ws_.m += bx;
  }

  struct Candidate {
    double theta;     // Ritz value of the iterated operator
    double lambda;    // eigenvalue of the original operator
    double residual;  // residual norm on the original operator
    VectorXcd y;
    VectorXcd s;
  };

  /// One fresh-start pass: expands a block Krylov space (full
  /// reorthogonalization), thick-restarts at the basis cap, and locks the
  /// converged prefix of the target set.  Returns true on any lock.
  bool run_pass(int need, int cycle_cap) {
    ws_.m = 0;
    const int b = std::max<int>(
        1, static_cast<int>(std::min<long>(opts_.block, (M_ - nlock_) / 2)));
    MatrixXcd X0 = prepare_block(MatrixXcd(M_, 0), b);
    if (X0.cols() == 0) return false;
    append_block(X0);

    for (int cycle = 0; cycle < cycle_cap; ++cycle) {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
          0.5 * (ws_.B.topLeftCorner(ws_.m, ws_.m) +
                 ws_.B.topLeftCorner(ws_.m, ws_.m).adjoint()));
      const Eigen::VectorXd theta = es.eigenvalues();
      const auto order = ritz_order(theta, order_);

      const int t = std::min(need, ws_.m);
      std::vector<Candidate> cand;
      cand.reserve(t);
      for (int i = 0; i < t; ++i) {
        Candidate c;
        c.s = es.eigenvectors().col(order[i]);
        c.theta = theta[order[i]];
        c.y = ws_.V.leftCols(ws_.m) * c.s;
        c.y.normalize();
        auto [lambda, res] = certify_(c.y);
        c.lambda = lambda;
        c.residual = res;
        cand.push_back(std::move(c));
      }
      track_best(cand);

      int prefix = 0;
      while (prefix < t &&
             cand[prefix].residual <= opts_.tol * std::max(1.0, std::abs(cand[prefix].lambda)))
        ++prefix;
      const bool last_cycle = (cycle == cycle_cap - 1);
      if (prefix == t || (prefix > 0 && (prefix >= b || last_cycle))) {
        for (int i = 0; i < prefix; ++i)
          lock(cand[i].lambda, std::move(cand[i].y), cand[i].residual);
        return true;
      }
      if (last_cycle) return false;

      // expansion seeds: residuals of the iterated operator for the
      // unconverged targets (computed before any restart invalidates s)
      MatrixXcd seeds(M_, std::min(b, t));
      int ns = 0;
      for (int i = 0; i < t && ns < seeds.cols(); ++i) {
        if (cand[i].residual <= opts_.tol * std::max(1.0, std::abs(cand[i].lambda))) continue;
        seeds.col(ns++) = ws_.W.leftCols(ws_.m) * cand[i].s -
                          cand[i].theta * (ws_.V.leftCols(ws_.m) * cand[i].s);
      }

      // thick restart when the basis is full
      if (ws_.m + b > static_cast<int>(ws_.V.cols())) {
        int keep = std::min(std::max(t + b, 2 * b) + 4, ws_.m - 1);
        keep = std::min(keep, static_cast<int>(ws_.V.cols()) - b);
        keep = std::max(keep, 1);
        MatrixXcd S(ws_.m, keep);
        Eigen::VectorXd kept(keep);
        for (int i = 0; i < keep; ++i) {
          S.col(i) = es.eigenvectors().col(order[i]);
          kept[i] = theta[order[i]];
        }
        const MatrixXcd Vk = ws_.V.leftCols(ws_.m) * S;
        const MatrixXcd Wk = ws_.W.leftCols(ws_.m) * S;
        ws_.V.leftCols(keep) = Vk;
        ws_.W.leftCols(keep) = Wk;
        ws_.B.setZero();
        ws_.B.topLeftCorner(keep, keep) = kept.cast<Complex>().asDiagonal();
        ws_.m = keep;
      }

      MatrixXcd X = prepare_block(seeds.leftCols(ns), b);
      if (X.cols() == 0) return false;
      append_block(X);
    }
    return false;
  }

  /// Fresh-start sweep after `count` pairs are locked: hunts for a missed
  /// eigenvalue strictly better (in the target metric) than the worst kept.
  /// Returns true when it locked one (caller re-verifies).
  bool verification_pass(int count) {
    std::vector<EigenPair> sorted_view(locked_);
    std::stable_sort(sorted_view.begin(), sorted_view.end(), [&](const auto& a, const auto& b) {
      return metric_(a.value) < metric_(b.value);
    });
    const double worst = metric_(sorted_view[count - 1].value);

    ws_.m = 0;
    MatrixXcd X0 = prepare_block(MatrixXcd(M_, 0), std::max(2, opts_.block / 2));
    if (X0.cols() == 0) return false;
    append_block(X0);
    for (int cycle = 0; cycle < std::min(opts_.max_cycles, 60); ++cycle) {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
          0.5 * (ws_.B.topLeftCorner(ws_.m, ws_.m) +
                 ws_.B.topLeftCorner(ws_.m, ws_.m).adjoint()));
      const Eigen::VectorXd theta = es.eigenvalues();
      const auto order = ritz_order(theta, order_);
      VectorXcd y = ws_.V.leftCols(ws_.m) * es.eigenvectors().col(order[0]);
      y.normalize();
      auto [lambda, res] = certify_(y);
      if (res <= opts_.tol * std::max(1.0, std::abs(lambda))) {
        const double slack = 10.0 * opts_.tol * std::max(1.0, std::abs(lambda));
        if (metric_(lambda) < worst - slack) {
          lock(lambda, std::move(y), res);
          return true;  // found a missed state
        }
        return false;
      }
      if (ws_.m + 2 > static_cast<int>(ws_.V.cols())) break;
      VectorXcd r = ws_.W.leftCols(ws_.m) * es.eigenvectors().col(order[0]) -
                    theta[order[0]] * (ws_.V.leftCols(ws_.m) * es.eigenvectors().col(order[0]));
      MatrixXcd X = prepare_block(r, 2);
      if (X.cols() == 0) break;
      append_block(X);
    }
    return false;
  }

  void track_best(const std::vector<Candidate>& cand) {
    std::vector<double> res;
    res.reserve(cand.size());
    for (const auto& c : cand) res.push_back(c.residual);
    if (best_residuals_.empty() ||
        (!res.empty() && res[0] < best_residuals_[0]))
      best_residuals_ = std::move(res);
  }
};

inline Eigen::SparseMatrix<Complex> to_sparse_shifted(const DiscreteOperator& op,
                                                      double sigma) {
  Eigen::SparseMatrix<Complex> A(op.M, op.M);
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(op.vals.size() + op.M);
  for (long r = 0; r < op.M; ++r) {
    bool diag_seen = false;
    for (long p = op.row_ptr[r]; p < op.row_ptr[r + 1]; ++p) {
      Complex v = op.vals[p];
      if (op.col_idx[p] == r) {
        v -= sigma;
        diag_seen = true;
      }
      trips.emplace_back(static_cast<int>(r), static_cast<int>(op.col_idx[p]), v);
    }
    if (!diag_seen) trips.emplace_back(static_cast<int>(r), static_cast<int>(r), -sigma);
  }
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

inline std::vector<EigenPair> diagonal_eigenpairs(const DiscreteOperator& op, int count,
                                                  std::function<double(double)> metric) {
  std::vector<long> idx(op.M);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](long a, long b) {
    return metric(op.vals[a].real()) < metric(op.vals[b].real());
  });
  std::vector<EigenPair> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    EigenPair p;
    p.value = op.vals[idx[i]].real();
    p.vector = VectorXcd::Zero(op.M);
    p.vector[idx[i]] = 1.0;
    p.residual = 0.0;
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<EigenPair> krylov_eigs(const DiscreteOperator& op, int count,
                                          LanczosOptions opts, bool nearest_mode,
                                          double sigma_near) {
  if (count < 1) throw InvalidInput("eigensolver: count must be >= 1");
  if (4L * count >= op.M)
    throw InvalidInput("eigensolver: count must be < M/4 (asked for " +
                       std::to_string(count) + " of " + std::to_string(op.M) + ")");

  std::function<double(double)> metric =
      nearest_mode ? std::function<double(double)>(
                         [sigma_near](double x) { return std::abs(x - sigma_near); })
                   : std::function<double(double)>([](double x) { return x; });

  if (op.diagonal()) return diagonal_eigenpairs(op, count, metric);

  bool invert = nearest_mode;
  if (!nearest_mode) {
    switch (opts.mode) {
      case SolverMode::plain: invert = false; break;
      case SolverMode::shift_invert: invert = true; break;
      case SolverMode::automatic: invert = true; break;
    }
  }

  auto certify = [&op](const VectorXcd& y) {
    const VectorXcd ay = op.matvec(y);
    const double lambda = y.dot(ay).real();
    return std::make_pair(lambda, (ay - lambda * y).norm());
  };

  if (!invert) {
    auto apply = [&op](const detail::MatrixXcd& X) {
      detail::MatrixXcd Y(X.rows(), X.cols());
      VectorXcd col;
      for (int c = 0; c < X.cols(); ++c) {
        op.matvec(X.col(c), col);
        Y.col(c) = col;
      }
      return Y;
    };
    KrylovSolver solver(op.M, apply, certify, TargetOrder::smallest_value, metric, opts);
    return solver.solve(count);
  }

  double sigma;
  if (nearest_mode)
    sigma = sigma_near;
  else if (opts.sigma)
    sigma = *opts.sigma;
  else
    sigma = op.gershgorin().first - 1.0;  // strictly below the spectrum

  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(to_sparse_shifted(op, sigma));
  if (lu.info() != Eigen::Success)
    throw SolverFailure("eigensolver: sparse factorization of (A - sigma) failed", {});

  auto apply = [&lu](const detail::MatrixXcd& X) { return detail::MatrixXcd(lu.solve(X)); };
  const TargetOrder order =
      nearest_mode ? TargetOrder::largest_abs : TargetOrder::largest_value;
  KrylovSolver solver(op.M, apply, certify, order, metric, opts);
  return solver.solve(count);
}

}  // namespace detail

/// The `count` algebraically smallest eigenpairs of op, residual-certified
/// to opts.tol.  Deterministic for a fixed seed.  Diagonal operators are
/// returned exactly.
inline std::vector<EigenPair> lowest_eigenpairs(const DiscreteOperator& op, int count,
                                                const LanczosOptions& opts = {}) {
  return detail::krylov_eigs(op, count, opts, false, 0.0);
}

/// The `count` eigenpairs closest to sigma (shift-invert with a sparse LU
/// factorization), for interior cluster targets.
inline std::vector<EigenPair> eigenpairs_near(const DiscreteOperator& op, double sigma,
                                              int count, const LanczosOptions& opts = {}) {
  return detail::krylov_eigs(op, count, opts, true, sigma);
}

/// Max deviation of the pairwise Gram matrix from the identity.
inline double gram_deviation(const std::vector<EigenPair>& pairs) {
  double dev = 0.0;
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = i; j < pairs.size(); ++j) {
      const Complex g = pairs[i].vector.dot(pairs[j].vector);
      dev = std::max(dev, std::abs(g - (i == j ? Complex{1.0, 0.0} : Complex{0.0, 0.0})));
    }
  return dev;
}

}  // namespace maglab
