#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maglab {

/// Base class for all maglab errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

/// omega degenerate at a point: the bundle map K acquired a real eigenvalue.
struct DegenerateField : Error {
  using Error::Error;
};

/// Total flux of omega is not an integer multiple of 2*pi; the line bundle
/// does not exist.
struct FluxNotIntegral : Error {
  using Error::Error;
};

/// Flux per plaquette beyond the aliasing guard; the grid cannot represent
/// the field.
struct GridTooCoarse : Error {
  using Error::Error;
};

struct ClusterUndetected : Error {
  using Error::Error;
};

/// Kernel magnitude below the noise floor where a fit or phase extraction
/// needed it.
struct InsufficientSignal : Error {
  using Error::Error;
};

/// Requested spectral filter support reaches into the first excited cluster.
struct FilterMixesClusters : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct CacheError : Error {
  using Error::Error;
};

/// Eigensolver gave up; carries the best residual norms seen for diagnosis.
struct SolverFailure : Error {
  std::vector<double> best_residuals;
  SolverFailure(const std::string& msg, std::vector<double> residuals)
      : Error(msg), best_residuals(std::move(residuals)) {}
};

}  // namespace maglab
