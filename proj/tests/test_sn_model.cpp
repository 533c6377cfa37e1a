#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fatigue/normal.hpp"
#include "fatigue/sn_model.hpp"

using namespace fatigue;

namespace {

// Parameters from the data-set-1 fit; handy round numbers for oracles.
SNParams table_params() { return SNParams{7.40, -2.01, 35.91, 0.5627, 0.5274}; }

// Simpson integration of the failure density in t = log10(n) coordinates,
// where the integrand is the plain normal density.
double integrate_pdf(double n, double s, const SNParams& p) {
  auto mu = sn_mean_log10_life(s, p);
  REQUIRE(mu.has_value());
  double lo = *mu - 12.0 * p.tau;
  double hi = std::log10(n);
  int intervals = 4000;
  double h = (hi - lo) / intervals;
  auto density = [&](double t) {
    double cycles = std::pow(10.0, t);
    // dn = n ln(10) dt
    return sn_pdf(cycles, s, p) * cycles * std::log(10.0);
  };
  double sum = density(lo) + density(hi);
  for (int i = 1; i < intervals; ++i)
    sum += density(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_SUITE("sn_model") {

TEST_CASE("normal helpers") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  for (double z : {-4.0, -3.0, -0.7, 0.0, 0.4, 2.5, 4.0}) {
    CHECK(inv_norm_cdf(norm_cdf(z)) == doctest::Approx(z).epsilon(1e-10));
  }
  // Deep tails: the double representation of u near 1 caps the attainable
  // accuracy at |du|/pdf(z).
  for (double z : {-7.0, 7.0}) {
    CHECK(inv_norm_cdf(norm_cdf(z)) == doctest::Approx(z).epsilon(1e-4));
  }
  // Tail continuity across the asymptotic switch in log_norm_sf.
  double a = log_norm_sf(35.35);
  double b = log_norm_sf(35.36);
  CHECK(a > b);
  CHECK(std::abs((b - a) / a) < 1e-3);
  CHECK_THROWS_AS(inv_norm_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(inv_norm_cdf(1.0), std::domain_error);
}

TEST_CASE("equivalent stress") {
  CHECK(equivalent_stress(45.0, 0.0, 0.5627) == doctest::Approx(45.0));
  CHECK(equivalent_stress(45.0, -1.0, 1.0) == doctest::Approx(90.0));
  CHECK(equivalent_stress(45.0, 0.1, 0.5627) ==
        doctest::Approx(45.0 * std::pow(0.9, 0.5627)).epsilon(1e-15));
  CHECK(equivalent_stress(45.0, 0.1, 0.5627) == doctest::Approx(42.41).epsilon(1e-4));
  CHECK_THROWS_AS(equivalent_stress(45.0, 1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(equivalent_stress(0.0, 0.5, 0.5), std::domain_error);
}

TEST_CASE("mean log-life with the fatigue-limit cutoff") {
  SNParams p = table_params();
  CHECK(!sn_mean_log10_life(35.91, p).has_value());
  CHECK(!sn_mean_log10_life(10.0, p).has_value());
  CHECK(sn_mean_log10_life(36.91, p).value() == doctest::Approx(7.40).epsilon(1e-12));
  CHECK(sn_mean_log10_life(45.91, p).value() == doctest::Approx(5.39).epsilon(1e-12));
}

TEST_CASE("cdf values and the below-limit regime") {
  SNParams p = table_params();
  CHECK(sn_cdf(1e6, 20.0, p) == 0.0);
  CHECK(sn_hazard(1e6, 20.0, p) == 0.0);
  CHECK(sn_pdf(1e6, 20.0, p) == 0.0);
  CHECK(sn_log_survival(1e6, 20.0, p) == 0.0);

  double s = 45.91;  // mu = 5.39
  CHECK(sn_cdf(std::pow(10.0, 5.39), s, p) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sn_cdf(1e6, s, p) == doctest::Approx(0.8763).epsilon(5e-4));
  CHECK_THROWS_AS(sn_cdf(0.0, s, p), std::domain_error);
  CHECK_THROWS_AS(sn_cdf(-5.0, s, p), std::domain_error);
}

TEST_CASE("cdf is monotone in cycles and in stress") {
  SNParams p = table_params();
  double previous = -1.0;
  for (double n = 1e3; n <= 1e9; n *= 10.0) {
    double value = sn_cdf(n, 45.0, p);
    CHECK(value >= previous);
    previous = value;
  }
  previous = -1.0;
  for (double s = 36.0; s <= 80.0; s += 4.0) {
    double value = sn_cdf(1e6, s, p);
    CHECK(value >= previous);
    previous = value;
  }
}

TEST_CASE("quantile round-trips through the cdf") {
  SNParams p = table_params();
  double s = 50.0;
  auto mu = sn_mean_log10_life(s, p);
  CHECK(sn_quantile(0.5, s, p) == doctest::Approx(std::pow(10.0, *mu)).epsilon(1e-12));
  CHECK(sn_quantile(norm_cdf(1.0), s, p) ==
        doctest::Approx(std::pow(10.0, *mu + p.tau)).epsilon(1e-10));
  for (double u : {0.01, 0.25, 0.5, 0.9, 0.999}) {
    CHECK(sn_cdf(sn_quantile(u, s, p), s, p) == doctest::Approx(u).epsilon(1e-10));
  }
  CHECK_THROWS_AS(sn_quantile(0.9, 30.0, p), std::domain_error);
  CHECK_THROWS_AS(sn_quantile(1.5, 50.0, p), std::domain_error);
}

TEST_CASE("hazard equals pdf over survival") {
  SNParams p = table_params();
  for (double s : {40.0, 45.0, 60.0}) {
    for (double n : {1e4, 1e5, 3e5, 1e6}) {
      double f = sn_pdf(n, s, p);
      double cdf = sn_cdf(n, s, p);
      if (cdf < 1.0 - 1e-12) {
        double direct = f / (1.0 - cdf);
        CHECK(sn_hazard(n, s, p) == doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("hazard matches the log-survival derivative") {
  SNParams p = table_params();
  for (double s : {42.0, 55.0}) {
    for (double n : {2e4, 2e5, 2e6}) {
      double h = n * 1e-4;
      double derivative =
          -(sn_log_survival(n + h, s, p) - sn_log_survival(n - h, s, p)) / (2.0 * h);
      CHECK(sn_hazard(n, s, p) == doctest::Approx(derivative).epsilon(1e-5));
    }
  }
}

TEST_CASE("pdf integrates to the cdf") {
  SNParams p = table_params();
  double s = 48.0;
  for (double n : {1e5, 1e6}) {
    CHECK(integrate_pdf(n, s, p) == doctest::Approx(sn_cdf(n, s, p)).epsilon(1e-6));
  }
}

TEST_CASE("deep-tail log survival stays finite and ordered") {
  SNParams p = table_params();
  double s = 80.0;
  double previous = 0.0;
  for (double n : {1e7, 1e9, 1e12, 1e15}) {
    double ls = sn_log_survival(n, s, p);
    CHECK(std::isfinite(ls));
    CHECK(ls < previous);
    previous = ls;
  }
}

}  // TEST_SUITE
