#include "fatigue/sn_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fatigue/errors.hpp"
#include "fatigue/normal.hpp"

namespace fatigue {

namespace {
constexpr double kLn10 = 2.302585092994046;

double standardized(double n, double mu, double tau) {
  return (std::log10(n) - mu) / tau;
}

void check_cycles(double n) {
  if (!(n > 0.0)) throw std::domain_error("cycle count n must be positive");
}
}  // namespace

void SNParams::validate() const {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  if (!(a3 >= 0.0)) throw ValidationError("fatigue limit A3 must be non-negative");
  if (!(a2 < 0.0)) throw ValidationError("slope A2 must be negative");
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("Walker exponent q must lie in (0, 1]");
}

double equivalent_stress(double s_max_ksi, double ratio_r, double q) {
  if (!(s_max_ksi > 0.0)) throw std::domain_error("S_max must be positive");
  if (!(ratio_r < 1.0)) throw std::domain_error("cycle ratio R must be < 1");
  return s_max_ksi * std::pow(1.0 - ratio_r, q);
}

std::optional<double> sn_mean_log10_life(double s, const SNParams& p) {
  if (!(s > p.a3)) return std::nullopt;
  return p.a1 + p.a2 * std::log10(s - p.a3);
}

double sn_cdf(double n, double s, const SNParams& p) {
  check_cycles(n);
  auto mu = sn_mean_log10_life(s, p);
  if (!mu) return 0.0;
  return norm_cdf(standardized(n, *mu, p.tau));
}

double sn_log_survival(double n, double s, const SNParams& p) {
  check_cycles(n);
  auto mu = sn_mean_log10_life(s, p);
  if (!mu) return 0.0;
  return log_norm_sf(standardized(n, *mu, p.tau));
}

double sn_pdf(double n, double s, const SNParams& p) {
  check_cycles(n);
  auto mu = sn_mean_log10_life(s, p);
  if (!mu) return 0.0;
  double z = standardized(n, *mu, p.tau);
  return std::exp(log_norm_pdf(z)) / (p.tau * n * kLn10);
}

double sn_log_hazard(double n, double s, const SNParams& p) {
  check_cycles(n);
  auto mu = sn_mean_log10_life(s, p);
  if (!mu) return -std::numeric_limits<double>::infinity();
  double z = standardized(n, *mu, p.tau);
  double log_pdf = log_norm_pdf(z) - std::log(p.tau * n * kLn10);
  return log_pdf - log_norm_sf(z);
}

double sn_hazard(double n, double s, const SNParams& p) {
  double lh = sn_log_hazard(n, s, p);
  return std::isinf(lh) ? 0.0 : std::exp(lh);
}

double sn_quantile(double u, double s, const SNParams& p) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
  auto mu = sn_mean_log10_life(s, p);
  if (!mu) throw std::domain_error("infinite life: stress is at or below the fatigue limit");
  return std::pow(10.0, *mu + p.tau * inv_norm_cdf(u));
}

}  // namespace fatigue
