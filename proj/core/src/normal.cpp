#include "fatigue/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace fatigue {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double log_norm_sf(double z) {
  double u = z / kSqrt2;
  if (u < 25.0) {
    return std::log(0.5 * std::erfc(u));
  }
  // erfc(u) ~ exp(-u^2)/(u sqrt(pi)) * (1 - 1/(2u^2) + 3/(4u^4) - 15/(8u^6))
  double u2 = u * u;
  double series = -0.5 / u2 + 0.75 / (u2 * u2) - 1.875 / (u2 * u2 * u2);
  return -0.6931471805599453 /* log 2 */ - u2 - std::log(u) -
         0.5723649429247001 /* log sqrt(pi) */ + std::log1p(series);
}

double log_norm_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double inv_norm_cdf(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("inv_norm_cdf: probability must lie in (0,1)");

  // Acklam's rational approximation, then one Halley polish step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double z;
  if (u < plow) {
    double q = std::sqrt(-2.0 * std::log(u));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - plow) {
    double q = u - 0.5;
    double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-u));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = norm_cdf(z) - u;
  double pdf = std::exp(log_norm_pdf(z));
  if (pdf > 0.0) {
    double w = e / pdf;
    z -= w / (1.0 + 0.5 * z * w);  // Halley step
  }
  return z;
}

}  // namespace fatigue
