#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fatigue/poisson_model.hpp"

namespace fatigue {

/// Index layout of the full parameter vector used by calibration.
enum ParamIndex : int { kA1 = 0, kA2, kA3, kQ, kTau, kBeta, kDelta, kParamCount };

extern const std::array<const char*, kParamCount> kParamNames;

struct ParamBounds {
  std::array<double, kParamCount> lo;
  std::array<double, kParamCount> hi;
};

/// Default open boxes matching the Bayesian uniform priors, with the
/// averaging length constrained to [0, 0.05] in.
ParamBounds default_bounds();

enum class ModelKind { MaxStress, Poisson };

struct MleOptions {
  std::array<bool, kParamCount> free_mask{};
  std::array<double, kParamCount> fixed_values{};  ///< used where free_mask is false
  ParamBounds bounds = default_bounds();
  int n_starts = 8;
  std::uint64_t seed = 20260809;
  int max_iterations = 4000;  ///< Nelder-Mead iterations per start
  double f_tol = 1e-9;
  std::optional<std::array<double, kParamCount>> initial;  ///< warm start for the first start
};

/// Free masks and fixed values for the two models; delta is either fixed at
/// fixed_delta or freed on [bounds.lo[kDelta], bounds.hi[kDelta]].
MleOptions default_mle_options(ModelKind model, bool delta_free, double fixed_delta = 0.0);

struct FitResult {
  std::array<double, kParamCount> estimates{};
  double max_loglik = 0.0;
  double aic = 0.0;
  bool converged = false;
  long n_evals = 0;
  int n_free = 0;
  ParamBounds bounds = default_bounds();

  SNParams sn_params() const;
  PoissonParams poisson_params() const;
};

/// Akaike information criterion 2 * (p - loglik).
double aic(int n_params, double loglik);

/// Log-likelihood of the full parameter vector under the chosen model.
double model_log_likelihood(const std::vector<Experiment>& data, const CacheMap& caches,
                            ModelKind model, const std::array<double, kParamCount>& params);

/// Multi-start Nelder-Mead maximum-likelihood fit over logistic-transformed
/// box coordinates. Deterministic given options.seed. When delta is free,
/// the averaged profiles are interpolated on the cache delta grid during the
/// search and the reported log-likelihood is re-evaluated with an exactly
/// recomputed profile at the estimated delta.
FitResult mle(const std::vector<Experiment>& data, const CacheMap& caches, ModelKind model,
              const MleOptions& opts);

struct ProfilePoint {
  double delta = 0.0;
  double loglik = 0.0;
  std::array<double, kParamCount> estimates{};
};

struct DeltaProfile {
  std::vector<ProfilePoint> points;
  double max_loglik = 0.0;
  double max_delta = 0.0;
  /// Approximate 95% interval {delta : loglik >= max - 1.92}, with linear
  /// interpolation of the crossings between grid points.
  double interval_lo = 0.0;
  double interval_hi = 0.0;
};

DeltaProfile profile_likelihood_delta(const std::vector<Experiment>& data,
                                      const CacheMap& caches, ModelKind model,
                                      const std::vector<double>& delta_grid,
                                      const MleOptions& base_opts);

/// Derivative-free simplex minimizer (used by mle; exposed for tests).
struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  long n_evals = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                             const std::vector<double>& x0, double step, int max_iterations,
                             double f_tol);

}  // namespace fatigue
