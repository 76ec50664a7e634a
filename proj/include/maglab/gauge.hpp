#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/geometry.hpp"

namespace maglab {

struct GridDims {
  int n1 = 0;
  int n2 = 0;
  long sites() const { return static_cast<long>(n1) * n2; }
};

/// Continuum flux of omega through the (i, j) plaquette
/// [i*h1, (i+1)*h1] x [j*h2, (j+1)*h2], by Gauss-Legendre quadrature.
inline double plaquette_flux(const ManifoldModel& model, int i, int j, GridDims dims) {
  if (!model.is_torus()) throw InvalidInput("plaquette_flux: torus models only");
  const double h1 = model.L1 / dims.n1, h2 = model.L2 / dims.n2;
  return detail::gauss2d([&](double x, double y) { return model.field(x, y); }, i * h1,
                         (i + 1) * h1, j * h2, (j + 1) * h2);
}

/// Discrete connection on L^k over the torus grid: one unit-modulus phase per
/// directed edge, built so that every plaquette holonomy equals
/// exp(-i*k*flux(p)) exactly.  Landau-type gauge: vertical links accumulate
/// the flux to their left within each row band; the seam column of horizontal
/// links carries the cocycle twist.
struct GaugeData {
  int k = 1;
  GridDims dims;
  double h1 = 0.0, h2 = 0.0;
  Eigen::ArrayXXd theta_x;    // (n1 x n2) arg of link (i,j) -> (i+1,j)
  Eigen::ArrayXXd theta_y;    // (n1 x n2) arg of link (i,j) -> (i,j+1)
  Eigen::ArrayXXd plaq_flux;  // continuum flux per plaquette (without the k factor)
  long total_flux_int = 0;    // N*k
  int twist1 = 0, twist2 = 0; // seam winding integers (N*k on the x-seam, 0)

  Complex link_x(int i, int j) const { return std::polar(1.0, theta_x(i, j)); }
  Complex link_y(int i, int j) const { return std::polar(1.0, theta_y(i, j)); }

  /// arg of the oriented plaquette product at (i, j), counterclockwise.
  double plaquette_arg(int i, int j) const {
    const int ip = (i + 1) % dims.n1, jp = (j + 1) % dims.n2;
    const Complex u = link_x(i, j) * link_y(ip, j) * std::conj(link_x(i, jp)) *
                      std::conj(link_y(i, j));
    return std::arg(u);
  }
};

inline GaugeData build_gauge(const ManifoldModel& model, int k, GridDims dims) {
  if (!model.is_torus())
    throw InvalidInput("build_gauge: sphere models are handled in their exact eigenbasis");
  if (k < 0) throw InvalidInput("build_gauge: tensor power k must be >= 0");
  if (dims.n1 < 16 || dims.n2 < 16) throw InvalidInput("build_gauge: grid dims must be >= 16");
  const int N = chern_flux(model);  // throws FluxNotIntegral when the bundle does not exist

  GaugeData g;
  g.k = k;
  g.dims = dims;
  g.h1 = model.L1 / dims.n1;
  g.h2 = model.L2 / dims.n2;
  g.theta_x = Eigen::ArrayXXd::Zero(dims.n1, dims.n2);
  g.theta_y = Eigen::ArrayXXd::Zero(dims.n1, dims.n2);
  g.plaq_flux = Eigen::ArrayXXd::Zero(dims.n1, dims.n2);
  g.total_flux_int = static_cast<long>(N) * k;
  g.twist1 = static_cast<int>(g.total_flux_int);
  g.twist2 = 0;

  for (int j = 0; j < dims.n2; ++j)
    for (int i = 0; i < dims.n1; ++i) g.plaq_flux(i, j) = plaquette_flux(model, i, j, dims);

  // Vertical links: minus k times the cumulative flux to the left in the row.
  for (int j = 0; j < dims.n2; ++j) {
    double cum = 0.0;
    for (int i = 0; i < dims.n1; ++i) {
      g.theta_y(i, j) = -k * cum;
      cum += g.plaq_flux(i, j);
    }
  }
  // Seam column of horizontal links: accumulate k times the row-band fluxes.
  double row_cum = 0.0;
  for (int j = 0; j < dims.n2; ++j) {
    g.theta_x(dims.n1 - 1, j) = k * row_cum;
    double row_total = 0.0;
    for (int i = 0; i < dims.n1; ++i) row_total += g.plaq_flux(i, j);
    row_cum += row_total;
  }
  return g;
}

/// One step of an edge path on the grid.
enum class Step { px, mx, py, my };

/// Product of oriented link phases along a closed loop starting at (i0, j0).
/// Throws for a path that does not return to its start.
inline Complex holonomy(const GaugeData& g, int i0, int j0, std::span<const Step> loop) {
  int i = i0, j = j0;
  Complex u{1.0, 0.0};
  const int n1 = g.dims.n1, n2 = g.dims.n2;
  for (Step s : loop) {
    switch (s) {
      case Step::px:
        u *= g.link_x(i, j);
        i = (i + 1) % n1;
        break;
      case Step::mx:
        i = (i - 1 + n1) % n1;
        u *= std::conj(g.link_x(i, j));
        break;
      case Step::py:
        u *= g.link_y(i, j);
        j = (j + 1) % n2;
        break;
      case Step::my:
        j = (j - 1 + n2) % n2;
        u *= std::conj(g.link_y(i, j));
        break;
    }
  }
  if (i != i0 || j != j0) throw InvalidInput("holonomy: path is not closed");
  return u;
}

/// Gauge transformation by site phases chi(i, j): conjugates every link.
/// Holonomies of closed loops are invariant.
inline GaugeData apply_site_phases(const GaugeData& g, const Eigen::ArrayXXd& chi) {
  if (chi.rows() != g.dims.n1 || chi.cols() != g.dims.n2)
    throw InvalidInput("apply_site_phases: chi dims mismatch");
  GaugeData out = g;
  const int n1 = g.dims.n1, n2 = g.dims.n2;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      out.theta_x(i, j) = g.theta_x(i, j) + chi((i + 1) % n1, j) - chi(i, j);
      out.theta_y(i, j) = g.theta_y(i, j) + chi(i, (j + 1) % n2) - chi(i, j);
    }
  return out;
}

}  // namespace maglab
