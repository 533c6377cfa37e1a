#pragma once

namespace fatigue {

/// Standard normal CDF.
double norm_cdf(double z);

/// log(1 - Phi(z)), evaluated through the complementary error function with
/// an asymptotic continuation for large z; accurate deep in the tail.
double log_norm_sf(double z);

/// log of the standard normal density.
double log_norm_pdf(double z);

/// Inverse standard normal CDF for u in (0, 1). Throws std::domain_error
/// otherwise.
double inv_norm_cdf(double u);

}  // namespace fatigue
