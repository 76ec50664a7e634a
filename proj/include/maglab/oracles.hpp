#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/geometry.hpp"

namespace maglab {

/// Exact continuum spectrum of Box_k on the constant-field torus:
/// lambda(m) = 2*B*k*m (Landau level B*k*(2m+1) minus the subtracted k*B),
/// each with multiplicity N*k = total flux * k / (2*pi).
struct LandauLevel {
  double value;
  long multiplicity;
};

inline std::vector<LandauLevel> landau_levels(int N, int k, double B, int m_max) {
  if (N < 1 || k < 1 || !(B > 0.0) || m_max < 0)
    throw InvalidInput("landau_levels: need N,k >= 1, B > 0, m_max >= 0");
  std::vector<LandauLevel> out;
  const long mult = static_cast<long>(N) * k;
  for (int m = 0; m <= m_max; ++m) out.push_back({2.0 * B * k * m, mult});
  return out;
}

/// Exact spectrum of Box_k on the charge-N sphere (monopole harmonics with
/// q = N*k/2, eigenvalues l(l+1) - q^2 - q at l = q + nu):
/// lambda(nu) = nu*(N*k + nu + 1), multiplicity N*k + 2*nu + 1.
struct MonopoleLevel {
  double value;
  long multiplicity;
};

inline std::vector<MonopoleLevel> monopole_spectrum(int N, int k, int nu_max) {
  if (N < 1 || k < 1 || nu_max < 0)
    throw InvalidInput("monopole_spectrum: need N,k >= 1, nu_max >= 0");
  std::vector<MonopoleLevel> out;
  const long Nk = static_cast<long>(N) * k;
  for (int nu = 0; nu <= nu_max; ++nu)
    out.push_back({static_cast<double>(nu) * (Nk + nu + 1), Nk + 2L * nu + 1});
  return out;
}

/// Lowest-Landau-level reproducing kernel on the plane at field density B,
/// in the symmetric comparison gauge:
///   (B/2pi) * exp(i*B*(x^y)/2) * exp(-B*|x-y|^2/4),
/// where x^y = x1*y2 - x2*y1.  Pass the effective field (k*B for Box_k).
inline Complex lll_kernel(double B, const Vec2& x, const Vec2& y) {
  if (!(B > 0.0)) throw InvalidInput("lll_kernel: B must be positive");
  const double cross = x.x() * y.y() - x.y() * y.x();
  const double d2 = (x - y).squaredNorm();
  return (B / two_pi) * std::polar(1.0, 0.5 * B * cross) * std::exp(-0.25 * B * d2);
}

/// Magnitude of the ground-cluster reproducing kernel on the charge-N sphere
/// at geodesic separation d: ((N*k+1)/(4*pi)) * cos^{N*k}(d/2).
inline double sphere_kernel(int N, int k, double d) {
  if (N < 1 || k < 1) throw InvalidInput("sphere_kernel: need N,k >= 1");
  if (d < 0.0 || d > pi) throw InvalidInput("sphere_kernel: d must lie in [0, pi]");
  const long Nk = static_cast<long>(N) * k;
  return (Nk + 1) / (4.0 * pi) * std::pow(std::cos(0.5 * d), static_cast<double>(Nk));
}

}  // namespace maglab
