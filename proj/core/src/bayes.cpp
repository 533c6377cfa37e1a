#include "fatigue/bayes.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "fatigue/calibrate.hpp"
#include "fatigue/errors.hpp"

namespace fatigue {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

bool PriorBox::contains(const std::vector<double>& x) const {
  for (std::size_t i = 0; i < 6; ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double PriorBox::log_density() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < 6; ++i) sum -= std::log(hi[i] - lo[i]);
  return sum;
}

void PriorBox::validate() const {
  for (std::size_t i = 0; i < 6; ++i)
    if (!(lo[i] < hi[i])) throw ValidationError("prior box has lower >= upper bound");
}

Chain run_metropolis(const std::function<double(const std::vector<double>&)>& log_lik,
                     const BoxDomain& box, int n_iter, std::uint64_t seed,
                     double burn_fraction, double log_prior_const,
                     std::vector<double> initial) {
  const int d = static_cast<int>(box.lo.size());
  if (n_iter < 1000) throw ValidationError("mcmc needs at least 1000 iterations");
  if (!(burn_fraction > 0.0 && burn_fraction < 1.0))
    throw ValidationError("burn-in fraction must lie in (0, 1)");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto in_box = [&](const std::vector<double>& x) {
    for (int i = 0; i < d; ++i)
      if (x[i] < box.lo[i] || x[i] > box.hi[i]) return false;
    return true;
  };

  std::vector<double> x = std::move(initial);
  if (x.empty()) {
    x.resize(d);
    for (int i = 0; i < d; ++i) x[i] = box.lo[i] + unif(rng) * (box.hi[i] - box.lo[i]);
  }
  double ll = log_lik(x);
  if (!std::isfinite(ll))
    throw std::runtime_error("metropolis initialization at a zero-likelihood point");

  const int burn_in = static_cast<int>(burn_fraction * n_iter);

  // Proposal: scale * L * xi, with L from the running sample covariance.
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    double w = 0.05 * (box.hi[i] - box.lo[i]);
    cov(i, i) = w * w;
  }
  Eigen::MatrixXd chol = cov.llt().matrixL();
  double log_scale = 0.0;

  Eigen::VectorXd run_mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd run_m2 = Eigen::MatrixXd::Zero(d, d);
  long run_n = 0;

  Chain chain;
  chain.seed = seed;
  chain.burn_in = burn_in;
  chain.samples.reserve(n_iter);
  chain.log_post.reserve(n_iter);
  chain.log_lik.reserve(n_iter);

  int accepted_post = 0;
  int window_accepted = 0, window_size = 0;
  std::vector<double> proposal(d);

  for (int iter = 0; iter < n_iter; ++iter) {
    Eigen::VectorXd xi(d);
    for (int i = 0; i < d; ++i) xi[i] = gauss(rng);
    Eigen::VectorXd step = std::exp(log_scale) * (chol * xi);
    for (int i = 0; i < d; ++i) proposal[i] = x[i] + step[i];

    bool accept = false;
    if (in_box(proposal)) {
      double ll_new = log_lik(proposal);
      if (std::isfinite(ll_new) &&
          (ll_new >= ll || std::log(unif(rng)) < ll_new - ll)) {
        accept = true;
        x = proposal;
        ll = ll_new;
      } else if (!std::isfinite(ll_new)) {
        accept = false;
      }
    }
    if (accept && iter >= burn_in) ++accepted_post;
    if (accept) ++window_accepted;
    ++window_size;

    chain.samples.push_back(x);
    chain.log_lik.push_back(ll);
    chain.log_post.push_back(ll + log_prior_const);

    if (iter < burn_in) {
      // Rank-1 covariance update.
      ++run_n;
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
      Eigen::VectorXd delta = xv - run_mean;
      run_mean += delta / static_cast<double>(run_n);
      run_m2 += delta * (xv - run_mean).transpose();

      if (window_size >= 50) {
        double rate = static_cast<double>(window_accepted) / window_size;
        log_scale += 0.3 * (rate - 0.23);
        window_accepted = 0;
        window_size = 0;
        if (run_n > 2 * d) {
          Eigen::MatrixXd sample_cov = run_m2 / static_cast<double>(run_n - 1);
          sample_cov += 1e-12 * Eigen::MatrixXd::Identity(d, d);
          Eigen::LLT<Eigen::MatrixXd> llt(sample_cov);
          if (llt.info() == Eigen::Success) chol = llt.matrixL();
        }
      }
    }
  }

  int post = n_iter - burn_in;
  chain.acceptance_rate = post > 0 ? static_cast<double>(accepted_post) / post : 0.0;
  return chain;
}

Chain mcmc(const std::vector<Experiment>& data, const CacheMap& caches,
           const PriorBox& prior, double delta, int n_iter, std::uint64_t seed,
           double burn_fraction) {
  prior.validate();
  auto log_lik = [&](const std::vector<double>& x) {
    std::array<double, kParamCount> params{x[0], x[1], x[2], x[3], x[4], x[5], delta};
    return model_log_likelihood(data, caches, ModelKind::Poisson, params);
  };

  BoxDomain box;
  box.lo.assign(prior.lo.begin(), prior.lo.end());
  box.hi.assign(prior.hi.begin(), prior.hi.end());

  // Draw a starting point with finite likelihood from the prior.
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5A5A5A5A5ull);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> start(6);
  bool found = false;
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    for (int i = 0; i < 6; ++i)
      start[i] = prior.lo[i] + unif(rng) * (prior.hi[i] - prior.lo[i]);
    found = std::isfinite(log_lik(start));
  }
  if (!found)
    throw std::runtime_error(
        "mcmc initialization failed: no finite-likelihood prior draw in 100 attempts");

  return run_metropolis(log_lik, box, n_iter, seed, burn_fraction, prior.log_density(),
                        start);
}

namespace {

std::vector<std::vector<double>> retained_samples(const Chain& chain) {
  if (chain.retained() <= 0)
    throw ValidationError("chain has no samples past burn-in");
  return {chain.samples.begin() + chain.burn_in, chain.samples.end()};
}

}  // namespace

PosteriorSummary posterior_summary(const Chain& chain) {
  auto samples = retained_samples(chain);
  const int d = chain.dim();
  const auto m = static_cast<double>(samples.size());

  PosteriorSummary summary;
  summary.mean.assign(d, 0.0);
  summary.sd.assign(d, 0.0);
  summary.q025.assign(d, 0.0);
  summary.q500.assign(d, 0.0);
  summary.q975.assign(d, 0.0);
  summary.correlation.assign(d, std::vector<double>(d, 0.0));

  for (const auto& s : samples)
    for (int i = 0; i < d; ++i) summary.mean[i] += s[i] / m;

  std::vector<std::vector<double>> centered(samples.size(), std::vector<double>(d));
  for (std::size_t r = 0; r < samples.size(); ++r)
    for (int i = 0; i < d; ++i) centered[r][i] = samples[r][i] - summary.mean[i];

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& c : centered)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) cov[i][j] += c[i] * c[j] / std::max(1.0, m - 1.0);
  for (int i = 0; i < d; ++i) summary.sd[i] = std::sqrt(std::max(0.0, cov[i][i]));

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i == j) {
        summary.correlation[i][j] = 1.0;
      } else if (summary.sd[i] > 0.0 && summary.sd[j] > 0.0) {
        summary.correlation[i][j] = cov[i][j] / (summary.sd[i] * summary.sd[j]);
      } else {
        summary.correlation[i][j] = 0.0;  // degenerate direction
        summary.degenerate = true;
      }
    }
  }

  std::vector<double> column(samples.size());
  auto quantile = [&](double u) {
    double pos = u * (column.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, column.size() - 1);
    double t = pos - lo;
    return (1.0 - t) * column[lo] + t * column[hi];
  };
  for (int i = 0; i < d; ++i) {
    for (std::size_t r = 0; r < samples.size(); ++r) column[r] = samples[r][i];
    std::sort(column.begin(), column.end());
    summary.q025[i] = quantile(0.025);
    summary.q500[i] = quantile(0.5);
    summary.q975[i] = quantile(0.975);
  }
  return summary;
}

DicResult dic(const Chain& chain,
              const std::function<double(const std::vector<double>&)>& log_lik) {
  auto samples = retained_samples(chain);
  const int d = chain.dim();

  double mean_dev = 0.0;
  for (int r = chain.burn_in; r < static_cast<int>(chain.samples.size()); ++r)
    mean_dev += -2.0 * chain.log_lik[r];
  mean_dev /= chain.retained();

  std::vector<double> mean_point(d, 0.0);
  for (const auto& s : samples)
    for (int i = 0; i < d; ++i) mean_point[i] += s[i] / samples.size();

  DicResult result;
  double ll_at_mean = log_lik(mean_point);
  if (!std::isfinite(ll_at_mean)) {
    // Posterior mean fell outside the support; use the MAP sample instead.
    result.map_fallback = true;
    int best = chain.burn_in;
    for (int r = chain.burn_in; r < static_cast<int>(chain.samples.size()); ++r)
      if (chain.log_post[r] > chain.log_post[best]) best = r;
    ll_at_mean = chain.log_lik[best];
  }
  double dev_at_mean = -2.0 * ll_at_mean;
  result.dic = 2.0 * mean_dev - dev_at_mean;
  result.p_d = mean_dev - dev_at_mean;
  return result;
}

double laplace_metropolis_logml(const Chain& chain) {
  auto samples = retained_samples(chain);
  const int d = chain.dim();
  const auto m = static_cast<double>(samples.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples)
    mean += Eigen::Map<const Eigen::VectorXd>(s.data(), d) / m;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : samples) {
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(s.data(), d) - mean;
    cov += c * c.transpose() / std::max(1.0, m - 1.0);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "laplace_metropolis_logml: singular posterior covariance; run a longer chain");
  double log_det = 0.0;
  Eigen::MatrixXd l = llt.matrixL();
  for (int i = 0; i < d; ++i) {
    if (!(l(i, i) > 0.0))
      throw std::runtime_error(
          "laplace_metropolis_logml: singular posterior covariance; run a longer chain");
    log_det += 2.0 * std::log(l(i, i));
  }

  double max_post = -kInf;
  for (int r = chain.burn_in; r < static_cast<int>(chain.samples.size()); ++r)
    max_post = std::max(max_post, chain.log_post[r]);
  return 0.5 * d * kLog2Pi + 0.5 * log_det + max_post;
}

SurvivalBand posterior_survival_band(const Chain& chain, const SpecimenCache& cache,
                                     double s_max_ksi, double ratio_r,
                                     const std::vector<double>& n_grid, double delta,
                                     int thin) {
  if (thin < 1) throw ValidationError("thinning stride must be >= 1");
  retained_samples(chain);  // validates burn-in

  SurvivalBand band;
  band.n_grid = n_grid;
  for (int r = chain.burn_in; r < static_cast<int>(chain.samples.size()); r += thin) {
    const auto& s = chain.samples[r];
    PoissonParams p{SNParams{s[0], s[1], s[2], s[3], s[4]}, s[5], delta};
    double traction = traction_scale(s_max_ksi, ratio_r, p.sn.q, cache.width_ratio);
    std::vector<double> curve(n_grid.size());
    for (std::size_t i = 0; i < n_grid.size(); ++i)
      curve[i] = survival(n_grid[i], traction, cache, p);
    band.curves.push_back(std::move(curve));
  }
  return band;
}

void write_chain_csv(const Chain& chain, const std::string& path) {
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << "a1,a2,a3,q,tau,beta,log_post\n";
  char buf[256];
  for (int r = chain.burn_in; r < static_cast<int>(chain.samples.size()); ++r) {
    const auto& s = chain.samples[r];
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s[0],
                  s[1], s[2], s[3], s[4], s[5], chain.log_post[r]);
    f << buf;
  }
}

void write_band_csv(const SurvivalBand& band, const std::string& path) {
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << "n,curve_id,survival\n";
  char buf[128];
  for (std::size_t c = 0; c < band.curves.size(); ++c) {
    for (std::size_t i = 0; i < band.n_grid.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g,%zu,%.12g\n", band.n_grid[i], c,
                    band.curves[c][i]);
      f << buf;
    }
  }
}

}  // namespace fatigue
