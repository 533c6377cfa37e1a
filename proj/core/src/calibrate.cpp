#include "fatigue/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fatigue/errors.hpp"

namespace fatigue {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double logit(double u) { return std::log(u / (1.0 - u)); }
}  // namespace

const std::array<const char*, kParamCount> kParamNames = {"a1",  "a2",   "a3",   "q",
                                                          "tau", "beta", "delta"};

ParamBounds default_bounds() {
  ParamBounds b;
  b.lo = {2.0, -7.0, 20.0, 0.1, 0.01, 0.01, 0.0};
  b.hi = {13.0, 0.0, 40.0, 1.0, 1.5, 5.0, 0.05};
  return b;
}

SNParams FitResult::sn_params() const {
  return SNParams{estimates[kA1], estimates[kA2], estimates[kA3], estimates[kQ],
                  estimates[kTau]};
}

PoissonParams FitResult::poisson_params() const {
  return PoissonParams{sn_params(), estimates[kBeta], estimates[kDelta]};
}

double aic(int n_params, double loglik) {
  if (n_params < 1) throw ValidationError("AIC needs at least one parameter");
  return 2.0 * (n_params - loglik);
}

MleOptions default_mle_options(ModelKind model, bool delta_free, double fixed_delta) {
  MleOptions opts;
  opts.free_mask = {true, true, true, true, true, model == ModelKind::Poisson, delta_free};
  opts.fixed_values = {0.0, 0.0, 0.0, 0.5, 0.1, 1.0, fixed_delta};
  return opts;
}

double model_log_likelihood(const std::vector<Experiment>& data, const CacheMap& caches,
                            ModelKind model,
                            const std::array<double, kParamCount>& params) {
  SNParams sn{params[kA1], params[kA2], params[kA3], params[kQ], params[kTau]};
  if (model == ModelKind::MaxStress)
    return max_stress_log_likelihood(data, caches, sn, params[kDelta]);
  return poisson_log_likelihood(data, caches,
                                PoissonParams{sn, params[kBeta], params[kDelta]});
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                             const std::vector<double>& x0, double step, int max_iterations,
                             double f_tol) {
  const int n = static_cast<int>(x0.size());
  long evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = fn(x);
    return std::isnan(v) ? kInf : v;
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += step;
  for (int i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  auto order = [&] {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (int i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fv[idx[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };

  bool converged = false;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    order();
    if (std::isfinite(fv[0]) && std::isfinite(fv[n]) && fv[n] - fv[0] <= f_tol) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (int j = 0; j < n; ++j) p[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
      return p;
    };

    std::vector<double> reflected = blend(1.0);
    double fr = eval(reflected);
    if (fr < fv[0]) {
      std::vector<double> expanded = blend(2.0);
      double fe = eval(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        fv[n] = fe;
      } else {
        simplex[n] = reflected;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = reflected;
      fv[n] = fr;
    } else {
      bool outside = fr < fv[n];
      std::vector<double> contracted = blend(outside ? 0.5 : -0.5);
      double fc = eval(contracted);
      if (fc < std::min(fr, fv[n])) {
        simplex[n] = contracted;
        fv[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fv[i] = eval(simplex[i]);
        }
      }
    }
  }
  order();
  return {simplex[0], fv[0], evals, converged};
}

namespace {

struct BoxTransform {
  std::vector<int> free_idx;
  ParamBounds bounds;
  std::array<double, kParamCount> fixed;

  std::array<double, kParamCount> expand(const std::vector<double>& z) const {
    std::array<double, kParamCount> x = fixed;
    for (std::size_t i = 0; i < free_idx.size(); ++i) {
      int k = free_idx[i];
      x[k] = bounds.lo[k] + (bounds.hi[k] - bounds.lo[k]) * logistic(z[i]);
    }
    return x;
  }

  std::vector<double> collapse(const std::array<double, kParamCount>& x) const {
    std::vector<double> z(free_idx.size());
    for (std::size_t i = 0; i < free_idx.size(); ++i) {
      int k = free_idx[i];
      double frac = (x[k] - bounds.lo[k]) / (bounds.hi[k] - bounds.lo[k]);
      frac = std::clamp(frac, 1e-6, 1.0 - 1e-6);
      z[i] = logit(frac);
    }
    return z;
  }
};

// Caches with the averaged profile pinned exactly at one delta, bypassing
// grid interpolation.
CacheMap exact_delta_caches(const CacheMap& caches, double delta) {
  CacheMap out;
  for (const auto& [id, cache] : caches) {
    SpecimenCache copy = cache;
    copy.delta_grid = {delta};
    copy.averaged = {cache.exact_profile(delta)};
    out.emplace(id, std::move(copy));
  }
  return out;
}

// Exact inner maximization over beta. The likelihood depends on beta only
// through the per-specimen gamma, which is piecewise constant with
// breakpoints at the distinct site stresses, so the profile over beta is a
// finite scan. Nelder-Mead sees only the remaining smooth parameters.
class BetaProfiler {
 public:
  BetaProfiler(const CacheMap& caches, double beta_lo, double beta_hi)
      : beta_lo_(beta_lo), beta_hi_(beta_hi) {
    std::vector<double> breakpoints;
    for (const auto& [id, cache] : caches) {
      GammaLadder ladder = build_gamma_ladder(cache);
      for (double v : ladder.values)
        if (v > beta_lo && v < beta_hi) breakpoints.push_back(v);
      ladders_.emplace(id, std::move(ladder));
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                      breakpoints.end());
    candidates_.push_back(beta_lo);
    candidates_.insert(candidates_.end(), breakpoints.begin(), breakpoints.end());
  }

  struct Result {
    double loglik = -kInf;
    double beta = 0.0;
  };

  Result eval(const std::vector<Experiment>& data, const CacheMap& caches,
              const SNParams& sn, double delta) const {
    BoundaryIntegralTerms terms = boundary_integral_terms(data, caches, sn, delta);
    const int n_specimens = static_cast<int>(terms.specimen_ids.size());
    std::vector<double> lambda(n_specimens, 0.0);
    std::vector<int> failures(n_specimens, 0);
    double hazard_logs = 0.0;
    for (std::size_t i = 0; i < terms.log_survival.size(); ++i) {
      int s = terms.specimen_index[i];
      lambda[s] += terms.log_survival[i];
      if (terms.hazard[i] > 0.0) {
        failures[s] += 1;
        hazard_logs += std::log(terms.hazard[i]);
      } else if (data[i].failed) {
        return {-kInf, candidates_.front()};  // impossible failure
      }
    }
    std::vector<const GammaLadder*> ladder(n_specimens);
    for (int s = 0; s < n_specimens; ++s)
      ladder[s] = &ladders_.at(terms.specimen_ids[s]);

    Result best;
    std::size_t best_index = 0;
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
      double loglik = hazard_logs;
      bool valid = true;
      for (int s = 0; s < n_specimens; ++s) {
        double gamma = ladder[s]->gamma(candidates_[c]);
        if (!(gamma > 0.0)) {
          valid = false;
          break;
        }
        loglik += lambda[s] / gamma - failures[s] * std::log(gamma);
      }
      if (valid && loglik > best.loglik) {
        best.loglik = loglik;
        best_index = c;
      }
    }
    if (std::isfinite(best.loglik)) {
      double upper = best_index + 1 < candidates_.size() ? candidates_[best_index + 1]
                                                         : beta_hi_;
      best.beta = 0.5 * (candidates_[best_index] + upper);
    } else {
      best.beta = candidates_.front();
    }
    return best;
  }

 private:
  std::map<std::string, GammaLadder> ladders_;
  std::vector<double> candidates_;
  double beta_lo_, beta_hi_;
};

}  // namespace

FitResult mle(const std::vector<Experiment>& data, const CacheMap& caches, ModelKind model,
              const MleOptions& opts) {
  if (data.empty()) throw ValidationError("cannot fit an empty dataset");
  if (caches.empty()) throw ValidationError("no specimen caches supplied");

  // When beta is free under the Poisson model it is profiled out exactly
  // instead of being a simplex coordinate: the likelihood is piecewise
  // constant in beta, which Nelder-Mead cannot descend reliably.
  const bool profile_beta = model == ModelKind::Poisson && opts.free_mask[kBeta];
  std::optional<BetaProfiler> profiler;
  if (profile_beta)
    profiler.emplace(caches, opts.bounds.lo[kBeta], opts.bounds.hi[kBeta]);

  BoxTransform transform;
  transform.bounds = opts.bounds;
  transform.fixed = opts.fixed_values;
  for (int k = 0; k < kParamCount; ++k) {
    if (opts.free_mask[k] && !(profile_beta && k == kBeta))
      transform.free_idx.push_back(k);
    if (!(opts.bounds.lo[k] < opts.bounds.hi[k]))
      throw ValidationError("invalid bounds for parameter " +
                            std::string(kParamNames[k]));
  }
  if (transform.free_idx.empty() && !profile_beta)
    throw ValidationError("no free parameters to fit");

  auto nm_objective = [&](const std::vector<double>& z) {
    std::array<double, kParamCount> x = transform.expand(z);
    if (profile_beta) {
      SNParams sn{x[kA1], x[kA2], x[kA3], x[kQ], x[kTau]};
      return -profiler->eval(data, caches, sn, x[kDelta]).loglik;
    }
    return -model_log_likelihood(data, caches, model, x);
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  auto random_start = [&] {
    std::vector<double> z(transform.free_idx.size());
    for (double& v : z) v = logit(frac(rng));
    return z;
  };

  std::vector<NelderMeadResult> runs;
  long evals = 0;
  bool any_converged = false;
  if (transform.free_idx.empty()) {
    // Only beta is free: the exact scan is the whole optimization.
    NelderMeadResult direct;
    direct.x = {};
    direct.f = nm_objective({});
    direct.n_evals = 1;
    direct.converged = std::isfinite(direct.f);
    runs.push_back(direct);
    any_converged = direct.converged;
    evals = 1;
  }
  for (int s = 0; !transform.free_idx.empty() && s < opts.n_starts; ++s) {
    std::vector<double> z0;
    if (s == 0 && opts.initial) {
      z0 = transform.collapse(*opts.initial);
    } else {
      z0 = random_start();
    }
    // Fatigue-limit likelihoods are -infinity over part of the box; redraw
    // until the start is usable.
    for (int attempt = 0; attempt < 50 && !std::isfinite(nm_objective(z0)); ++attempt) {
      z0 = random_start();
      ++evals;
    }
    NelderMeadResult run =
        nelder_mead(nm_objective, z0, 0.5, opts.max_iterations, opts.f_tol);
    evals += run.n_evals;
    runs.push_back(std::move(run));
    any_converged = any_converged || (runs.back().converged && std::isfinite(runs.back().f));
  }
  std::stable_sort(runs.begin(), runs.end(),
                   [](const NelderMeadResult& a, const NelderMeadResult& b) {
                     return a.f < b.f;
                   });

  // Iterated restarts from the leading candidates: a fresh simplex escapes
  // the degenerate shapes Nelder-Mead collapses into on ridged surfaces, and
  // polishing several basins guards against a shallow local maximum that
  // happened to score best on the first pass.
  NelderMeadResult best = runs.front();
  int polish = std::min<int>(3, static_cast<int>(runs.size()));
  for (int r = 0; r < polish; ++r) {
    NelderMeadResult incumbent = runs[r];
    if (!std::isfinite(incumbent.f)) continue;
    double step = 0.25;
    for (int restart = 0; restart < 12; ++restart) {
      NelderMeadResult run =
          nelder_mead(nm_objective, incumbent.x, step, opts.max_iterations, opts.f_tol);
      evals += run.n_evals;
      double gain = incumbent.f - run.f;
      if (run.f < incumbent.f) incumbent = run;
      if (gain <= 1e-7 && step <= 0.03) break;
      if (gain <= 1e-7) step *= 0.4;
    }
    if (incumbent.f < best.f || best.x.empty()) best = incumbent;
  }

  FitResult result;
  result.bounds = opts.bounds;
  result.n_free = static_cast<int>(transform.free_idx.size()) + (profile_beta ? 1 : 0);
  result.n_evals = evals;
  result.converged = any_converged && std::isfinite(best.f);
  result.estimates = transform.expand(best.x);
  result.max_loglik = -best.f;
  if (profile_beta && std::isfinite(best.f)) {
    SNParams sn{result.estimates[kA1], result.estimates[kA2], result.estimates[kA3],
                result.estimates[kQ], result.estimates[kTau]};
    result.estimates[kBeta] =
        profiler->eval(data, caches, sn, result.estimates[kDelta]).beta;
  }

  // Exact re-evaluation at the reported delta when the search interpolated
  // between cached profiles.
  double delta_hat = result.estimates[kDelta];
  bool on_grid = false;
  for (const auto& [id, cache] : caches) {
    on_grid = std::any_of(cache.delta_grid.begin(), cache.delta_grid.end(),
                          [&](double d) { return std::abs(d - delta_hat) <= 1e-15; });
    break;
  }
  if (!on_grid && std::isfinite(result.max_loglik)) {
    CacheMap exact = exact_delta_caches(caches, delta_hat);
    if (profile_beta) {
      SNParams sn{result.estimates[kA1], result.estimates[kA2], result.estimates[kA3],
                  result.estimates[kQ], result.estimates[kTau]};
      BetaProfiler::Result exact_fit = profiler->eval(data, exact, sn, delta_hat);
      result.max_loglik = exact_fit.loglik;
      result.estimates[kBeta] = exact_fit.beta;
    } else {
      result.max_loglik = model_log_likelihood(data, exact, model, result.estimates);
    }
  }
  result.aic = aic(result.n_free, result.max_loglik);
  return result;
}

DeltaProfile profile_likelihood_delta(const std::vector<Experiment>& data,
                                      const CacheMap& caches, ModelKind model,
                                      const std::vector<double>& delta_grid,
                                      const MleOptions& base_opts) {
  if (delta_grid.empty()) throw ValidationError("delta grid must be non-empty");
  for (double d : delta_grid)
    if (d < 0.0) throw ValidationError("delta grid values must be >= 0");

  DeltaProfile profile;
  std::optional<std::array<double, kParamCount>> warm = base_opts.initial;
  for (double d : delta_grid) {
    MleOptions opts = base_opts;
    opts.free_mask[kDelta] = false;
    opts.fixed_values[kDelta] = d;
    opts.initial = warm;
    FitResult fit = mle(data, caches, model, opts);
    profile.points.push_back({d, fit.max_loglik, fit.estimates});
    warm = fit.estimates;
    warm->at(kDelta) = d;
  }

  auto best = std::max_element(profile.points.begin(), profile.points.end(),
                               [](const ProfilePoint& a, const ProfilePoint& b) {
                                 return a.loglik < b.loglik;
                               });
  profile.max_loglik = best->loglik;
  profile.max_delta = best->delta;

  const double threshold = profile.max_loglik - 1.92;  // chi-square(1)/2 at 95%
  auto cross = [&](const ProfilePoint& out, const ProfilePoint& in) {
    double t = (threshold - out.loglik) / (in.loglik - out.loglik);
    return out.delta + t * (in.delta - out.delta);
  };
  profile.interval_lo = profile.points.front().delta;
  profile.interval_hi = profile.points.back().delta;
  for (std::size_t i = 0; i + 1 < profile.points.size(); ++i) {
    const auto& a = profile.points[i];
    const auto& b = profile.points[i + 1];
    if (a.loglik < threshold && b.loglik >= threshold) profile.interval_lo = cross(a, b);
    if (a.loglik >= threshold && b.loglik < threshold) {
      profile.interval_hi = cross(b, a);
      break;
    }
  }
  return profile;
}

}  // namespace fatigue
