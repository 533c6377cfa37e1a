#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fatigue/poisson_model.hpp"

namespace fatigue {

/// Uniform prior box over (A1, A2, A3, q, tau, beta).
struct PriorBox {
  std::array<double, 6> lo{2.0, -7.0, 20.0, 0.1, 0.01, 0.01};
  std::array<double, 6> hi{13.0, 0.0, 40.0, 1.0, 1.5, 5.0};

  bool contains(const std::vector<double>& x) const;
  /// log of the constant prior density inside the box.
  double log_density() const;
  void validate() const;
};

struct Chain {
  std::vector<std::vector<double>> samples;  ///< all iterations, in order
  std::vector<double> log_post;              ///< log-likelihood + log prior
  std::vector<double> log_lik;
  double acceptance_rate = 0.0;  ///< over post-burn-in iterations
  std::uint64_t seed = 0;
  int burn_in = 0;  ///< number of leading adaptation samples

  int dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].size()); }
  int retained() const { return static_cast<int>(samples.size()) - burn_in; }
};

struct BoxDomain {
  std::vector<double> lo, hi;
};

/// Adaptive Gaussian random-walk Metropolis on a box. The proposal
/// covariance is adapted toward 0.23 acceptance during the burn-in fraction
/// and frozen afterwards. Out-of-box proposals are rejected. Deterministic
/// given the seed. log_prior_const is added to log_lik inside the box.
Chain run_metropolis(const std::function<double(const std::vector<double>&)>& log_lik,
                     const BoxDomain& box, int n_iter, std::uint64_t seed,
                     double burn_fraction = 0.2, double log_prior_const = 0.0,
                     std::vector<double> initial = {});

/// Posterior sampling of (A1, A2, A3, q, tau, beta) for the spatial Poisson
/// model at a fixed delta. Initialization draws from the prior until the
/// likelihood is finite (at most 100 attempts).
Chain mcmc(const std::vector<Experiment>& data, const CacheMap& caches,
           const PriorBox& prior, double delta, int n_iter, std::uint64_t seed,
           double burn_fraction = 0.2);

struct PosteriorSummary {
  std::vector<double> mean, sd, q025, q500, q975;
  std::vector<std::vector<double>> correlation;
  bool degenerate = false;  ///< some parameter had zero variance
};

PosteriorSummary posterior_summary(const Chain& chain);

struct DicResult {
  double dic = 0.0;
  double p_d = 0.0;          ///< effective number of parameters
  bool map_fallback = false; ///< deviance at the posterior mean was undefined
};

/// Deviance information criterion 2 * mean(D) - D(posterior mean), with
/// D = -2 * log-likelihood evaluated by log_lik.
DicResult dic(const Chain& chain,
              const std::function<double(const std::vector<double>&)>& log_lik);

/// Laplace-Metropolis log marginal likelihood:
/// (d/2) log(2 pi) + 1/2 log det(posterior covariance) + max log posterior.
/// Throws std::runtime_error when the sample covariance is singular.
double laplace_metropolis_logml(const Chain& chain);

struct SurvivalBand {
  std::vector<double> n_grid;
  std::vector<std::vector<double>> curves;  ///< one curve per thinned sample
};

/// Survival curves from thinned posterior samples at fixed (S_max, R) for
/// one specimen; delta is the value the chain was run with.
SurvivalBand posterior_survival_band(const Chain& chain, const SpecimenCache& cache,
                                     double s_max_ksi, double ratio_r,
                                     const std::vector<double>& n_grid, double delta,
                                     int thin = 50);

void write_chain_csv(const Chain& chain, const std::string& path);
void write_band_csv(const SurvivalBand& band, const std::string& path);

}  // namespace fatigue
