#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "maglab/clusters.hpp"
#include "maglab/errors.hpp"
#include "maglab/geometry.hpp"

namespace maglab {

/// Spectral projector Pi_k onto the low cluster, held as its
/// quadrature-normalized eigenvector block: Pi(x, y) = sum_j psi_j(x)
/// conj(psi_j(y)).  Rows and the diagonal are evaluated on demand; the full
/// M x M kernel is never formed.
struct ProjectorKernel {
  int k = 0;
  GridDims dims;
  double h1 = 0.0, h2 = 0.0;
  long d = 0;
  ManifoldModel model;
  Eigen::MatrixXcd psi;  // M x d, orthonormal w.r.t. the h1*h2 quadrature

  double weight() const { return h1 * h2; }
  long sites() const { return dims.sites(); }

  long site_index(int i, int j) const { return i + static_cast<long>(dims.n1) * j; }
  Vec2 site_coords(long idx) const {
    return {static_cast<double>(idx % dims.n1) * h1,
            static_cast<double>(idx / dims.n1) * h2};
  }

  Complex entry(long i, long j) const {
    Complex acc{0.0, 0.0};
    for (long m = 0; m < d; ++m) acc += psi(i, m) * std::conj(psi(j, m));
    return acc;
  }

  /// Pi(x_i, y) for all grid points y.
  Eigen::VectorXcd row(long i) const {
    return (psi * psi.row(i).adjoint()).conjugate();
  }

  Eigen::VectorXd diagonal() const { return psi.cwiseAbs2().rowwise().sum(); }

  double trace() const { return weight() * diagonal().sum(); }

  /// Rigorous bound on sup_{x,y} |(Pi o Pi - Pi)(x, y)| under the quadrature
  /// composition: |Psi (G - I) Psi^H| <= ||G - I||_2 * max_x |Psi(x,:)|^2.
  double idempotency_defect() const {
    const Eigen::MatrixXcd G = weight() * (psi.adjoint() * psi);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        G - Eigen::MatrixXcd::Identity(d, d), Eigen::EigenvaluesOnly);
    const double gnorm = es.eigenvalues().cwiseAbs().maxCoeff();
    return gnorm * diagonal().maxCoeff();
  }
};

/// Build Pi_k from the certified nu=0 cluster.  Refuses clusters whose
/// residuals exceed the tolerance.
inline ProjectorKernel assemble_projector(const SpectralCluster& cluster0,
                                          const ManifoldModel& model, GridDims dims,
                                          double residual_tol = 1e-8) {
  if (!model.is_torus())
    throw InvalidInput("assemble_projector: grid kernels exist for torus models only");
  if (cluster0.nu != 0)
    throw InvalidInput("assemble_projector: expected the nu=0 cluster");
  for (size_t j = 0; j < cluster0.residuals.size(); ++j)
    if (cluster0.residuals[j] >
        residual_tol * std::max(1.0, std::abs(cluster0.eigenvalues[j])))
      throw InvalidInput("assemble_projector: cluster residuals above tolerance");
  if (cluster0.vectors.rows() != dims.sites())
    throw InvalidInput("assemble_projector: cluster/grid size mismatch");

  ProjectorKernel kernel;
  kernel.k = cluster0.k;
  kernel.dims = dims;
  kernel.h1 = model.L1 / dims.n1;
  kernel.h2 = model.L2 / dims.n2;
  kernel.d = cluster0.size();
  kernel.model = model;
  kernel.psi = cluster0.vectors / std::sqrt(kernel.h1 * kernel.h2);
  return kernel;
}

/// Samples of the diagonal x -> Pi(x, x); mean * Vol = d_k by the trace
/// identity.
inline Eigen::VectorXd diagonal_density(const ProjectorKernel& kernel) {
  return kernel.diagonal();
}

struct GaussianFit {
  double rate = 0.0;       // slope of -log|Pi(x0, y)| against d(x0, y)^2
  double prefactor = 0.0;  // exp(-intercept): |Pi| amplitude at d = 0
  double rms_residual = 0.0;
  long points = 0;
};

/// Least-squares Gaussian decay fit of the kernel row at x0 inside a window.
inline GaussianFit gaussian_fit(const ProjectorKernel& kernel, long x0, double radius,
                                double noise_floor = 1e-8) {
  const double inj = 0.5 * std::min(kernel.model.L1, kernel.model.L2);
  if (!(radius > 0.0) || radius > inj)
    throw InvalidInput("gaussian_fit: window must lie within the injectivity radius");

  const Eigen::VectorXcd row = kernel.row(x0);
  const Vec2 p0 = kernel.site_coords(x0);
  std::vector<double> xs, ys;
  for (long y = 0; y < kernel.sites(); ++y) {
    const double dist = distance(kernel.model, p0, kernel.site_coords(y));
    if (dist > radius) continue;
    const double mag = std::abs(row[y]);
    if (mag < noise_floor) continue;
    xs.push_back(dist * dist);
    ys.push_back(-std::log(mag));
  }
  if (xs.size() < 8)
    throw InsufficientSignal("gaussian_fit: fewer than 8 samples above the noise floor");

  const long n = static_cast<long>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (long i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw InsufficientSignal("gaussian_fit: degenerate window");
  GaussianFit fit;
  fit.rate = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.rate * sx) / n;
  fit.prefactor = std::exp(-intercept);
  double ss = 0.0;
  for (long i = 0; i < n; ++i) {
    const double r = ys[i] - (intercept + fit.rate * xs[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  fit.points = n;
  return fit;
}

/// Mixed second derivative of arg Pi at the diagonal, extracted from the
/// gauge-invariant plaquette cross-ratio
///   Pi(x+, y+) Pi(x-, y-) conj(Pi(x+, y-)) conj(Pi(x-, y+)).
/// Site phases cancel exactly, so no comparison-gauge fixing is needed; the
/// antisymmetric part is the curvature form k*K/2 at x0 to leading order.
struct PhaseForm {
  Mat2 form;         // c_ab = d^2 arg Pi / dx_a dy_b
  Mat2 form_over_k;
  double antisym_rel_defect = 0.0;
};

inline PhaseForm phase_linearization(const ProjectorKernel& kernel, long x0,
                                     int step_cells = 1) {
  if (!kernel.model.is_torus() || kernel.model.eps != 0.0)
    throw InvalidInput("phase_linearization: constant-field torus only");
  if (step_cells < 1 || 2 * step_cells >= std::min(kernel.dims.n1, kernel.dims.n2))
    throw InvalidInput("phase_linearization: bad step");

  const int i0 = static_cast<int>(x0 % kernel.dims.n1);
  const int j0 = static_cast<int>(x0 / kernel.dims.n1);
  const int n1 = kernel.dims.n1, n2 = kernel.dims.n2;
  auto shifted = [&](int da, int db) {
    return kernel.site_index(((i0 + da) % n1 + n1) % n1, ((j0 + db) % n2 + n2) % n2);
  };
  const double steps[2] = {step_cells * kernel.h1, step_cells * kernel.h2};

  Mat2 form;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int s = step_cells;
      const int dxa[2] = {a == 0 ? s : 0, a == 1 ? s : 0};
      const int dyb[2] = {b == 0 ? s : 0, b == 1 ? s : 0};
      const long xp = shifted(dxa[0], dxa[1]), xm = shifted(-dxa[0], -dxa[1]);
      const long yp = shifted(dyb[0], dyb[1]), ym = shifted(-dyb[0], -dyb[1]);
      const Complex z = kernel.entry(xp, yp) * kernel.entry(xm, ym) *
                        std::conj(kernel.entry(xp, ym)) * std::conj(kernel.entry(xm, yp));
      if (std::abs(z) < 1e-40)
        throw InsufficientSignal("phase_linearization: kernel vanishes near x0");
      form(a, b) = std::arg(z) / (4.0 * steps[a] * steps[b]);
    }
  }
  PhaseForm out;
  out.form = form;
  out.form_over_k = form / kernel.k;
  const Mat2 sym = 0.5 * (form + form.transpose());
  const Mat2 anti = 0.5 * (form - form.transpose());
  out.antisym_rel_defect = sym.cwiseAbs().maxCoeff() /
                           std::max(anti.cwiseAbs().maxCoeff(), 1e-300);
  return out;
}

/// Rescaled kernel profiles u -> k^{-1} |Pi_k(x0, x0 + (u/sqrt(k), 0))| on a
/// common u grid, with pairwise sup distances.  Profiles are linearly
/// interpolated from the grid row through x0.
struct CollapseResult {
  Eigen::VectorXd u;
  std::vector<int> ks;
  std::vector<Eigen::VectorXd> profiles;
  Eigen::MatrixXd distance;  // pairwise sup distance
  bool truncated = false;
};

inline CollapseResult scaling_collapse(std::span<const ProjectorKernel* const> kernels,
                                       const Vec2& frac, double u_max, int n_u) {
  if (kernels.size() < 2) throw InvalidInput("scaling_collapse: need at least two kernels");
  if (n_u < 8) throw InvalidInput("scaling_collapse: need at least 8 profile points");
  for (const auto* kp : kernels)
    if (!kp->model.is_torus()) throw InvalidInput("scaling_collapse: torus kernels only");

  CollapseResult res;
  // Window: stay inside the injectivity radius of every kernel's torus.
  double u_cap = u_max;
  for (const auto* kp : kernels) {
    const double dmax = 0.45 * kp->model.L1;
    u_cap = std::min(u_cap, dmax * std::sqrt(static_cast<double>(kp->k)));
  }
  if (u_cap < u_max) res.truncated = true;

  res.u.resize(n_u);
  for (int j = 0; j < n_u; ++j) res.u[j] = u_cap * j / (n_u - 1);

  for (const auto* kp : kernels) {
    const auto& kern = *kp;
    const int i0 = static_cast<int>(frac.x() * kern.dims.n1) % kern.dims.n1;
    const int j0 = static_cast<int>(frac.y() * kern.dims.n2) % kern.dims.n2;
    const long x0 = kern.site_index(i0, j0);
    const Eigen::VectorXcd row = kern.row(x0);
    Eigen::VectorXd prof(n_u);
    const double sqrtk = std::sqrt(static_cast<double>(kern.k));
    for (int j = 0; j < n_u; ++j) {
      const double dist = res.u[j] / sqrtk;
      const double cells = dist / kern.h1;
      const long c0 = static_cast<long>(std::floor(cells));
      const double t = cells - c0;
      const long ia = (i0 + c0) % kern.dims.n1;
      const long ib = (i0 + c0 + 1) % kern.dims.n1;
      const double va = std::abs(row[kern.site_index(static_cast<int>(ia), j0)]);
      const double vb = std::abs(row[kern.site_index(static_cast<int>(ib), j0)]);
      prof[j] = ((1.0 - t) * va + t * vb) / kern.k;
    }
    res.ks.push_back(kern.k);
    res.profiles.push_back(std::move(prof));
  }

  const int nk = static_cast<int>(kernels.size());
  res.distance = Eigen::MatrixXd::Zero(nk, nk);
  for (int a = 0; a < nk; ++a)
    for (int b = 0; b < nk; ++b)
      res.distance(a, b) = (res.profiles[a] - res.profiles[b]).cwiseAbs().maxCoeff();
  return res;
}

}  // namespace maglab
