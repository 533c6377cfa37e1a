#pragma once

#include <optional>

namespace fatigue {

/// Parameters of the lognormal fatigue-limit S-N model (Model Ia).
/// Lives below the fatigue limit A3 are infinite.
struct SNParams {
  double a1 = 0.0;   ///< intercept, log10 cycles
  double a2 = 0.0;   ///< slope per log10 ksi (negative)
  double a3 = 0.0;   ///< fatigue limit, ksi
  double q = 0.5;    ///< Walker exponent
  double tau = 0.1;  ///< standard deviation of log10 life

  /// Throws ValidationError if the parameter box constraints are violated.
  void validate() const;
};

/// Walker equivalent stress S_max * (1-R)^q. Throws std::domain_error for
/// R >= 1 or S_max <= 0.
double equivalent_stress(double s_max_ksi, double ratio_r, double q);

/// Mean log10 life at stress s. Empty result encodes infinite life
/// (s <= A3): cracks never initiate.
std::optional<double> sn_mean_log10_life(double s, const SNParams& p);

/// CDF of the number of cycles to failure at stress s; 0 below the
/// fatigue limit. Throws std::domain_error for n <= 0.
double sn_cdf(double n, double s, const SNParams& p);

/// Failure density per cycle; 0 below the fatigue limit.
double sn_pdf(double n, double s, const SNParams& p);

/// Hazard rate pdf/(1-cdf), evaluated in log space for tail stability.
double sn_hazard(double n, double s, const SNParams& p);

/// log(1 - cdf); the workhorse for censored likelihoods. Always <= 0,
/// exactly 0 below the fatigue limit.
double sn_log_survival(double n, double s, const SNParams& p);

/// log of the hazard rate; -infinity below the fatigue limit.
double sn_log_hazard(double n, double s, const SNParams& p);

/// Quantile: smallest n with cdf >= u. Requires 0 < u < 1 and s > A3
/// (throws std::domain_error otherwise, including the infinite-life case).
double sn_quantile(double u, double s, const SNParams& p);

}  // namespace fatigue
