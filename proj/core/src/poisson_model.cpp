#include "fatigue/poisson_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fatigue/elasticity.hpp"
#include "fatigue/errors.hpp"

namespace fatigue {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed) {
  // 53-bit mantissa draw in (0, 1).
  std::uint64_t bits = splitmix64(seed) >> 11;
  double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  return u;
}

// Boundary integrals of Eq-style site sums for one experiment.
struct SiteIntegrals {
  double log_survival = 0.0;  // sum w_k log(1 - F(n; T a_k))
  double hazard = 0.0;        // sum w_k h(n; T a_k)
};

SiteIntegrals site_integrals(double n, double traction, const SurfaceQuadrature& quad,
                             const std::vector<double>& profile, const SNParams& sn,
                             bool with_hazard) {
  SiteIntegrals acc;
  const int m = quad.site_count();
  for (int k = 0; k < m; ++k) {
    double s = traction * profile[k];
    if (!(s > sn.a3)) continue;  // below the fatigue limit: contributes zero
    double w = quad.weight(k);
    acc.log_survival += w * sn_log_survival(n, s, sn);
    if (with_hazard) acc.hazard += w * sn_hazard(n, s, sn);
  }
  return acc;
}

}  // namespace

void SpecimenCache::profile_at(double delta, std::vector<double>& out) const {
  if (delta_grid.empty()) throw std::domain_error("empty delta grid in specimen cache");
  if (delta < delta_grid.front() - 1e-15 || delta > delta_grid.back() + 1e-15)
    throw std::domain_error("delta outside the cached grid range");
  auto it = std::lower_bound(delta_grid.begin(), delta_grid.end(), delta);
  std::size_t hi = static_cast<std::size_t>(it - delta_grid.begin());
  if (hi >= delta_grid.size()) hi = delta_grid.size() - 1;
  if (std::abs(delta_grid[hi] - delta) <= 1e-15 || hi == 0) {
    out = averaged[hi];
    return;
  }
  std::size_t lo = hi - 1;
  double t = (delta - delta_grid[lo]) / (delta_grid[hi] - delta_grid[lo]);
  const auto& a = averaged[lo];
  const auto& b = averaged[hi];
  out.resize(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = (1.0 - t) * a[k] + t * b[k];
}

std::vector<double> SpecimenCache::profile_at(double delta) const {
  std::vector<double> out;
  profile_at(delta, out);
  return out;
}

std::vector<double> SpecimenCache::exact_profile(double delta, int subgrid) const {
  if (!interpolant) throw std::runtime_error("specimen cache has no interpolant");
  return build_averaged_profile(*interpolant, delta, subgrid).values;
}

double SpecimenCache::max_profile(double delta) const {
  std::vector<double> prof = profile_at(delta);
  return *std::max_element(prof.begin(), prof.end());
}

double SpecimenCache::gamma(double beta) const {
  return highly_stressed_volume_or_zero(unit_eff, quad, beta);
}

SpecimenCache build_specimen_cache(std::shared_ptr<const TriMesh> mesh,
                                   const UnitStressField& field,
                                   const SpecimenGeometry& geom,
                                   std::vector<double> delta_grid, int subgrid) {
  if (delta_grid.empty() || delta_grid.front() != 0.0)
    delta_grid.insert(delta_grid.begin(), 0.0);
  std::sort(delta_grid.begin(), delta_grid.end());
  delta_grid.erase(std::unique(delta_grid.begin(), delta_grid.end()), delta_grid.end());

  SpecimenCache cache;
  cache.quad = build_surface_quadrature(*mesh, geom.thickness_in);
  cache.interpolant = std::make_shared<StressInterpolant>(mesh, field);
  cache.unit_eff = cache.interpolant->node_values();
  cache.width_ratio = geom.width_ratio();
  cache.thickness_in = geom.thickness_in;
  cache.mesh = std::move(mesh);
  cache.delta_grid = delta_grid;
  cache.averaged.reserve(delta_grid.size());
  for (double d : delta_grid)
    cache.averaged.push_back(build_averaged_profile(*cache.interpolant, d, subgrid).values);
  return cache;
}

double survival(double n, double traction, const SpecimenCache& cache,
                const PoissonParams& p) {
  if (!(n > 0.0)) throw std::domain_error("cycle count n must be positive");
  if (!(traction > 0.0)) throw std::domain_error("traction must be positive");
  double gamma = cache.gamma(p.beta);
  if (!(gamma > 0.0)) throw std::domain_error("empty highly stressed volume");
  std::vector<double> profile = cache.profile_at(p.delta);
  SiteIntegrals acc = site_integrals(n, traction, cache.quad, profile, p.sn, false);
  return std::exp(acc.log_survival / gamma);
}

double first_crack_density(double n, double traction, const SpecimenCache& cache,
                           const PoissonParams& p) {
  if (!(n > 0.0)) throw std::domain_error("cycle count n must be positive");
  if (!(traction > 0.0)) throw std::domain_error("traction must be positive");
  double gamma = cache.gamma(p.beta);
  if (!(gamma > 0.0)) throw std::domain_error("empty highly stressed volume");
  std::vector<double> profile = cache.profile_at(p.delta);
  SiteIntegrals acc = site_integrals(n, traction, cache.quad, profile, p.sn, true);
  return std::exp(acc.log_survival / gamma) * acc.hazard / gamma;
}

double poisson_log_likelihood(const std::vector<Experiment>& data, const CacheMap& caches,
                              const PoissonParams& p) {
  double loglik = 0.0;
  // Per-specimen profile and gamma, resolved on first use.
  std::map<std::string, std::pair<std::vector<double>, double>> prepared;
  for (const auto& exp : data) {
    auto it = prepared.find(exp.specimen_id);
    if (it == prepared.end()) {
      auto cit = caches.find(exp.specimen_id);
      if (cit == caches.end())
        throw ValidationError("no specimen cache for id '" + exp.specimen_id + "'");
      std::pair<std::vector<double>, double> entry;
      cit->second.profile_at(p.delta, entry.first);
      entry.second = cit->second.gamma(p.beta);
      it = prepared.emplace(exp.specimen_id, std::move(entry)).first;
    }
    const auto& [profile, gamma] = it->second;
    if (!(gamma > 0.0)) return -kInf;
    const SpecimenCache& cache = caches.at(exp.specimen_id);
    double traction = traction_scale(exp.s_max_ksi, exp.ratio_r, p.sn.q, cache.width_ratio);
    SiteIntegrals acc =
        site_integrals(exp.cycles, traction, cache.quad, profile, p.sn, exp.failed);
    loglik += acc.log_survival / gamma;
    if (exp.failed) {
      if (!(acc.hazard > 0.0)) return -kInf;  // impossible failure
      loglik += std::log(acc.hazard / gamma);
    }
    if (std::isinf(loglik)) return -kInf;
  }
  return loglik;
}

double max_stress_log_likelihood(const std::vector<Experiment>& data,
                                 const CacheMap& caches, const SNParams& sn,
                                 double delta) {
  double loglik = 0.0;
  std::map<std::string, double> max_profile;
  for (const auto& exp : data) {
    auto it = max_profile.find(exp.specimen_id);
    if (it == max_profile.end()) {
      auto cit = caches.find(exp.specimen_id);
      if (cit == caches.end())
        throw ValidationError("no specimen cache for id '" + exp.specimen_id + "'");
      it = max_profile.emplace(exp.specimen_id, cit->second.max_profile(delta)).first;
    }
    const SpecimenCache& cache = caches.at(exp.specimen_id);
    double traction = traction_scale(exp.s_max_ksi, exp.ratio_r, sn.q, cache.width_ratio);
    double s = traction * it->second;
    if (exp.failed) {
      double pdf = sn_pdf(exp.cycles, s, sn);
      if (!(pdf > 0.0)) return -kInf;
      loglik += std::log(pdf);
    } else {
      loglik += sn_log_survival(exp.cycles, s, sn);
    }
    if (std::isinf(loglik)) return -kInf;
  }
  return loglik;
}

BoundaryIntegralTerms boundary_integral_terms(const std::vector<Experiment>& data,
                                              const CacheMap& caches, const SNParams& sn,
                                              double delta) {
  BoundaryIntegralTerms terms;
  terms.log_survival.reserve(data.size());
  terms.hazard.reserve(data.size());
  terms.specimen_index.reserve(data.size());

  std::map<std::string, std::pair<int, std::vector<double>>> prepared;
  for (const auto& exp : data) {
    auto it = prepared.find(exp.specimen_id);
    if (it == prepared.end()) {
      auto cit = caches.find(exp.specimen_id);
      if (cit == caches.end())
        throw ValidationError("no specimen cache for id '" + exp.specimen_id + "'");
      std::pair<int, std::vector<double>> entry;
      entry.first = static_cast<int>(terms.specimen_ids.size());
      terms.specimen_ids.push_back(exp.specimen_id);
      cit->second.profile_at(delta, entry.second);
      it = prepared.emplace(exp.specimen_id, std::move(entry)).first;
    }
    const SpecimenCache& cache = caches.at(exp.specimen_id);
    double traction = traction_scale(exp.s_max_ksi, exp.ratio_r, sn.q, cache.width_ratio);
    SiteIntegrals acc =
        site_integrals(exp.cycles, traction, cache.quad, it->second.second, sn, exp.failed);
    terms.log_survival.push_back(acc.log_survival);
    terms.hazard.push_back(exp.failed ? acc.hazard : 0.0);
    terms.specimen_index.push_back(it->second.first);
  }
  return terms;
}

double GammaLadder::gamma(double beta) const {
  auto it = std::upper_bound(values.begin(), values.end(), beta);
  if (it == values.begin()) return total;
  return measure_above[static_cast<std::size_t>(it - values.begin()) - 1];
}

GammaLadder build_gamma_ladder(const SpecimenCache& cache) {
  std::vector<std::pair<double, double>> sites(cache.unit_eff.size());
  for (std::size_t k = 0; k < sites.size(); ++k)
    sites[k] = {cache.unit_eff[k], cache.quad.weight(static_cast<int>(k))};
  std::sort(sites.begin(), sites.end());

  GammaLadder ladder;
  for (const auto& [value, weight] : sites) {
    ladder.total += weight;
    if (ladder.values.empty() || value > ladder.values.back()) {
      ladder.values.push_back(value);
      ladder.measure_above.push_back(0.0);
    }
  }
  // Suffix sums: measure strictly above each distinct level.
  double above = 0.0;
  std::size_t i = sites.size();
  for (std::size_t j = ladder.values.size(); j-- > 0;) {
    while (i > 0 && sites[i - 1].first > ladder.values[j]) {
      above += sites[i - 1].second;
      --i;
    }
    ladder.measure_above[j] = above;
  }
  return ladder;
}

LifeDraw sample_life_draw(double traction, const SpecimenCache& cache,
                          const PoissonParams& p, std::uint64_t seed,
                          double censor_cycles) {
  if (!(traction > 0.0)) throw std::domain_error("traction must be positive");
  double gamma = cache.gamma(p.beta);
  if (!(gamma > 0.0)) throw std::domain_error("empty highly stressed volume");
  std::vector<double> profile = cache.profile_at(p.delta);
  double u = uniform01(seed);

  auto survival_at = [&](double n) {
    SiteIntegrals acc = site_integrals(n, traction, cache.quad, profile, p.sn, false);
    return std::exp(acc.log_survival / gamma);
  };

  if (survival_at(censor_cycles) >= u) return {censor_cycles, false, u};

  // survival is continuous and decreasing in n; bracket below by a cycle
  // count where survival > u.
  double lo = censor_cycles;
  do {
    lo /= 16.0;
  } while (survival_at(lo) < u && lo > 1e-12);
  double log_lo = std::log10(lo), log_hi = std::log10(censor_cycles);
  for (int iter = 0; iter < 200 && (log_hi - log_lo) > 1e-10; ++iter) {
    double mid = 0.5 * (log_lo + log_hi);
    if (survival_at(std::pow(10.0, mid)) >= u)
      log_lo = mid;
    else
      log_hi = mid;
  }
  return {std::pow(10.0, 0.5 * (log_lo + log_hi)), true, u};
}

Experiment sample_life(double traction, const SpecimenCache& cache, const PoissonParams& p,
                       std::uint64_t seed, double censor_cycles,
                       const std::string& specimen_id) {
  LifeDraw draw = sample_life_draw(traction, cache, p, seed, censor_cycles);
  Experiment exp;
  exp.specimen_id = specimen_id;
  exp.s_max_ksi = traction / cache.width_ratio;  // with R = 0 the q-scaling drops out
  exp.ratio_r = 0.0;
  exp.cycles = draw.cycles;
  exp.failed = draw.failed;
  return exp;
}

}  // namespace fatigue
