#pragma once

#include <cmath>
#include <vector>

#include "maglab/errors.hpp"
#include "maglab/geometry.hpp"

namespace maglab {

/// Closed-form leading-order predictions consumed as expected values by the
/// spectral and projector analyses.
struct PredictionInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double widen = 0.0) const {
    return x >= lo - widen && x <= hi + widen;
  }
};

/// nu-th cluster energy envelope [2*k*nu*min kappa, 2*k*nu*max kappa];
/// degenerate for constant kappa.
inline std::vector<PredictionInterval> predicted_cluster_energies(const ManifoldModel& model,
                                                                  int k, int nu_max) {
  if (nu_max < 0) throw InvalidInput("predicted_cluster_energies: nu_max must be >= 0");
  std::vector<PredictionInterval> out;
  const double lo = min_kappa(model), hi = max_kappa(model);
  for (int nu = 0; nu <= nu_max; ++nu)
    out.push_back({2.0 * k * nu * lo, 2.0 * k * nu * hi});
  return out;
}

/// Harmonic oscillator levels kappa*nu + Tr+K/2 at a reference point.
inline std::vector<double> oscillator_levels(double kappa, double trace_plus, int nu_max) {
  if (!(kappa > 0.0)) throw InvalidInput("oscillator_levels: kappa must be positive");
  std::vector<double> out;
  for (int nu = 0; nu <= nu_max; ++nu) out.push_back(kappa * nu + 0.5 * trace_plus);
  return out;
}

/// Leading dimension count of the low cluster: round(k * flux / 2*pi) = N*k
/// on the torus; N*k + 1 on the sphere (the +1 is oracle-derived subleading
/// data for the monopole family, not a leading-order statement).
inline long predicted_dimension(const ManifoldModel& model, int k) {
  const long N = chern_flux(model);
  return model.is_torus() ? N * k : N * k + 1;
}

/// Gap constant M = 2*min kappa (all non-cluster eigenvalues exceed M*k) and
/// the suggested cluster-0 slack as a fraction of the first gap.
struct GapConstants {
  double M = 0.0;
  double eps_fraction = 0.05;
};

inline GapConstants gap_constants(const ManifoldModel& model) {
  return {2.0 * min_kappa(model), 0.05};
}

/// Aggregated per-(model, k) prediction bundle.
struct Prediction {
  long dimension = 0;
  std::vector<PredictionInterval> cluster_energies;
  GapConstants gap;
  std::vector<double> oscillator;  // at the min-kappa reference point
};

inline Prediction make_prediction(const ManifoldModel& model, int k, int nu_max) {
  Prediction p;
  p.dimension = predicted_dimension(model, k);
  p.cluster_energies = predicted_cluster_energies(model, k, nu_max);
  p.gap = gap_constants(model);
  const double kappa = min_kappa(model);
  p.oscillator = oscillator_levels(kappa, kappa, nu_max);
  return p;
}

}  // namespace maglab
