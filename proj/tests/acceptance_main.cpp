// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criteria that depend on externally digitized data are skipped (not failed)
// when the data is absent.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fatigue/bayes.hpp"
#include "fatigue/calibrate.hpp"
#include "fatigue/dataset.hpp"
#include "fatigue/normal.hpp"
#include "fatigue/run_config.hpp"

using namespace fatigue;

namespace {

struct Outcome {
  bool pass = true;
  bool skipped = false;
  std::string detail;

  void require(bool ok, const std::string& message) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += message;
    }
  }
  void note(const std::string& message) {
    if (!detail.empty()) detail += "; ";
    detail += message;
  }
  void skip(const std::string& message) {
    skipped = true;
    detail = message;
  }
};

std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", value);
  return buf;
}

GeometryConfig strip_config() {
  GeometryConfig c;
  c.kind = SpecimenKind::EdgeNotched;
  c.w_max_in = 1.0;
  c.w_min_in = 1.0;
  c.notch_radius_in = 0.25;
  c.half_length_in = 2.0;
  c.thickness_in = 0.09;
  return c;
}

SpecimenCache make_cache(const GeometryConfig& config, double h, int levels,
                         std::vector<double> delta_grid = {0.0}) {
  SpecimenGeometry geom = build_geometry(config);
  TriMesh mesh = triangulate(geom, h);
  for (int i = 0; i < levels; ++i) mesh = refine(mesh);
  auto mesh_ptr = std::make_shared<TriMesh>(std::move(mesh));
  MaterialParams mat;
  UnitStressField field = recover_stress(*mesh_ptr, assemble_solve(*mesh_ptr, mat), mat);
  return build_specimen_cache(mesh_ptr, field, geom, std::move(delta_grid));
}

std::vector<Experiment> simulate_specimen2(const SpecimenCache& cache,
                                           const PoissonParams& p, int count,
                                           std::uint64_t seed, double s_lo, double s_hi) {
  std::vector<Experiment> data;
  data.reserve(count);
  for (int i = 0; i < count; ++i) {
    double s_max = s_lo + (s_hi - s_lo) * (i % 149) / 148.0;
    double ratio = (i % 2 == 0) ? 0.1 : -1.0;
    double traction = traction_scale(s_max, ratio, p.sn.q, cache.width_ratio);
    LifeDraw draw = sample_life_draw(traction, cache, p, seed + i);
    data.push_back({"2", s_max, ratio, draw.cycles, draw.failed});
  }
  return data;
}

// --- criteria ---------------------------------------------------------

void uniform_stress_consistency(Outcome& out) {
  SpecimenCache cache = make_cache(strip_config(), 0.25, 1);
  PoissonParams p{SNParams{6.0, -1.2, 40.0, 0.6, 0.23}, 0.5, 0.0};
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    double traction = 41.0 + 2.0 * i;
    for (int j = 0; j < 20; ++j) {
      double n = std::pow(10.0, 3.0 + 0.25 * j);
      double lhs = survival(n, traction, cache, p);
      double rhs = 1.0 - sn_cdf(n, traction, p.sn);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  out.require(worst <= 1e-10, "max |survival - (1-F)| = " + fmt(worst));
  out.note("max_err=" + fmt(worst));
}

void fem_patch_test(Outcome& out) {
  SpecimenGeometry geom = build_geometry(strip_config());
  TriMesh mesh = refine(triangulate(geom, 0.25));
  MaterialParams mat;
  UnitStressField field = recover_stress(mesh, assemble_solve(mesh, mat), mat);
  double worst = 0.0;
  for (int i = 0; i < mesh.node_count(); ++i) {
    worst = std::max(worst, std::abs(field.sx[i] - 1.0));
    worst = std::max(worst, std::abs(field.sy[i]));
    worst = std::max(worst, std::abs(field.txy[i]));
  }
  out.require(worst <= 1e-8, "max stress error " + fmt(worst));
  out.note("max_err=" + fmt(worst));
}

void stress_concentration(Outcome& out) {
  TriMesh mesh = triangulate_hole_plate(1.0, 10.0, 10.0, 1.2);
  for (int level = 0; level < 4; ++level) mesh = refine(mesh);
  MaterialParams mat;
  UnitStressField field = recover_stress(mesh, assemble_solve(mesh, mat), mat);
  double max_eff = 0.0;
  for (int i = 0; i < mesh.node_count(); ++i)
    max_eff = std::max(max_eff, effective_stress(field.sx[i], field.sy[i], field.txy[i]));
  out.require(max_eff >= 2.85 && max_eff <= 3.15,
              "max effective stress " + fmt(max_eff) + " outside 3.0 +/- 5%");
  out.note("Kt=" + fmt(max_eff));
}

void aic_arithmetic(Outcome& out) {
  out.require(std::abs(aic(5, -950.16) - 1910.32) <= 1e-9,
              "aic(5, -950.16) = " + fmt(aic(5, -950.16)));
  out.require(std::abs(aic(6, -1650.05) - 3312.10) <= 1e-9,
              "aic(6, -1650.05) = " + fmt(aic(6, -1650.05)));
}

void quadrature_consistency(Outcome& out) {
  double worst = 0.0;
  auto check_mesh_quadrature = [&](const TriMesh& mesh, double thickness) {
    SurfaceQuadrature quad = build_surface_quadrature(mesh, thickness);
    double expect = surface_measure(mesh, thickness);
    worst = std::max(worst, std::abs(quad.total() - expect) / expect);
  };
  for (int id : {1, 2, 3}) {
    SpecimenGeometry geom = build_geometry(specimen_defaults(id));
    TriMesh mesh = triangulate(geom, default_edge_length(geom));
    check_mesh_quadrature(mesh, geom.thickness_in);
    check_mesh_quadrature(refine(mesh), geom.thickness_in);
  }
  SpecimenGeometry strip = build_geometry(strip_config());
  check_mesh_quadrature(triangulate(strip, 0.2), strip.thickness_in);
  check_mesh_quadrature(triangulate_hole_plate(1.0, 6.0, 5.0, 1.0), 0.09);
  out.require(worst <= 1e-12, "weight-sum relative error " + fmt(worst));

  // Vertex rule on a polygonal mesh integrates linear fields exactly.
  TriMesh mesh = refine(triangulate(strip, 0.3));
  SurfaceQuadrature quad = build_surface_quadrature(mesh, strip.thickness_in);
  double integral = 0.0;
  for (int k = 0; k < quad.site_count(); ++k)
    integral += quad.face[k] * (0.75 + 2.0 * mesh.nodes[k].x - 0.5 * mesh.nodes[k].y);
  // 2 * integral of (0.75 + 2x - 0.5y) over [0,2]x[0,0.5]
  double exact = 2.0 * (0.75 * 1.0 + 2.0 * 1.0 - 0.5 * 0.25);
  out.require(std::abs(integral - exact) <= 1e-12 * std::abs(exact),
              "vertex rule error " + fmt(std::abs(integral - exact)));
  out.note("weight_err=" + fmt(worst));
}

void hazard_density_identities(Outcome& out) {
  SpecimenCache cache = make_cache(specimen_defaults(2), 0.76, 1);
  PoissonParams p{SNParams{6.0, -1.2, 40.0, 0.6, 0.23}, 1.5, 0.0};

  double worst_fd = 0.0;
  for (double traction : {30.0, 36.0}) {
    for (double n : {1e5, 1e6}) {
      double h = n * 1e-4;
      double derivative =
          -(survival(n + h, traction, cache, p) - survival(n - h, traction, cache, p)) /
          (2.0 * h);
      double rho = first_crack_density(n, traction, cache, p);
      worst_fd = std::max(worst_fd, std::abs(rho - derivative) / rho);
    }
  }
  out.require(worst_fd <= 1e-4, "density vs -dS/dn relative error " + fmt(worst_fd));

  // The direct f/(1-F) route computes 1-F by subtraction, so compare only
  // where that subtraction itself keeps ~1e-10 relative accuracy.
  double worst_hazard = 0.0;
  for (double s : {42.0, 47.0, 55.0}) {
    for (double n : {1e4, 1e5, 1e6}) {
      double cdf = sn_cdf(n, s, p.sn);
      if (cdf >= 1.0 - 1e-5) continue;
      double direct = sn_pdf(n, s, p.sn) / (1.0 - cdf);
      worst_hazard =
          std::max(worst_hazard, std::abs(sn_hazard(n, s, p.sn) - direct) / direct);
    }
  }
  out.require(worst_hazard <= 1e-10, "hazard identity error " + fmt(worst_hazard));

  CacheMap caches;
  caches.emplace("2", cache);
  std::vector<Experiment> data = simulate_specimen2(cache, p, 50, 314159, 26.0, 55.0);
  double loglik = poisson_log_likelihood(data, caches, p);
  double reconstructed = 0.0;
  for (const auto& e : data) {
    double traction = traction_scale(e.s_max_ksi, e.ratio_r, p.sn.q, cache.width_ratio);
    reconstructed += e.failed
                         ? std::log(first_crack_density(e.cycles, traction, cache, p))
                         : std::log(survival(e.cycles, traction, cache, p));
  }
  out.require(std::abs(loglik - reconstructed) <= 1e-10 * std::abs(loglik),
              "log-likelihood decomposition error " +
                  fmt(std::abs(loglik - reconstructed)));
  out.note("fd_err=" + fmt(worst_fd));
}

void simulation_calibration_loop(Outcome& out) {
  PoissonParams truth{SNParams{6.0, -1.2, 40.0, 0.6, 0.23}, 1.9, 0.0};
  SpecimenCache cache = make_cache(specimen_defaults(2), 0.76, 1);
  CacheMap caches;
  caches.emplace("2", cache);
  std::vector<Experiment> data = simulate_specimen2(cache, truth, 500, 271828, 26.0, 58.0);
  int failures = 0;
  for (const auto& e : data) failures += e.failed ? 1 : 0;

  MleOptions opts = default_mle_options(ModelKind::Poisson, false, 0.0);
  opts.bounds.hi[kA3] = 60.0;  // keep the generating fatigue limit interior
  opts.n_starts = 8;
  opts.seed = 1618;
  FitResult fit = mle(data, caches, ModelKind::Poisson, opts);

  auto rel = [&](int k, double target) {
    return std::abs(fit.estimates[k] - target) / std::abs(target);
  };
  out.require(fit.converged, "optimizer did not converge");
  out.require(rel(kA1, truth.sn.a1) < 0.05, "A1 off by " + fmt(rel(kA1, truth.sn.a1)));
  out.require(rel(kA2, truth.sn.a2) < 0.05, "A2 off by " + fmt(rel(kA2, truth.sn.a2)));
  out.require(rel(kQ, truth.sn.q) < 0.05, "q off by " + fmt(rel(kQ, truth.sn.q)));
  out.require(rel(kTau, truth.sn.tau) < 0.05, "tau off by " + fmt(rel(kTau, truth.sn.tau)));
  out.require(rel(kA3, truth.sn.a3) < 0.10, "A3 off by " + fmt(rel(kA3, truth.sn.a3)));
  out.require(rel(kBeta, truth.beta) < 0.10, "beta off by " + fmt(rel(kBeta, truth.beta)));
  out.note("failures=" + std::to_string(failures) + "/500, A1=" + fmt(fit.estimates[kA1]) +
           " A2=" + fmt(fit.estimates[kA2]) + " A3=" + fmt(fit.estimates[kA3]) +
           " q=" + fmt(fit.estimates[kQ]) + " tau=" + fmt(fit.estimates[kTau]) +
           " beta=" + fmt(fit.estimates[kBeta]));
}

void profile_likelihood_checks(Outcome& out) {
  std::vector<double> grid{0.0, 0.00625, 0.0125, 0.025, 0.05};

  // Synthetic notched data generated at delta* = 0.0125.
  SpecimenCache cache = make_cache(specimen_defaults(2), 0.76, 1, grid);
  CacheMap caches;
  caches.emplace("2", cache);
  PoissonParams truth{SNParams{6.0, -1.2, 40.0, 0.6, 0.23}, 1.9, 0.0125};
  std::vector<Experiment> data = simulate_specimen2(cache, truth, 250, 141421, 26.0, 55.0);
  MleOptions opts = default_mle_options(ModelKind::Poisson, false, 0.0);
  opts.bounds.hi[kA3] = 60.0;
  opts.n_starts = 4;
  opts.seed = 23;
  DeltaProfile profile =
      profile_likelihood_delta(data, caches, ModelKind::Poisson, grid, opts);
  out.require(profile.interval_lo <= 0.0125 && 0.0125 <= profile.interval_hi,
              "interval [" + fmt(profile.interval_lo) + ", " + fmt(profile.interval_hi) +
                  "] misses delta*=0.0125");

  // Uniform strip: the profile must be flat.
  SpecimenCache strip = make_cache(strip_config(), 0.25, 0, grid);
  CacheMap strip_caches;
  strip_caches.emplace("1", strip);
  PoissonParams strip_truth{SNParams{6.0, -1.2, 40.0, 0.6, 0.23}, 0.5, 0.0};
  std::vector<Experiment> strip_data;
  for (int i = 0; i < 80; ++i) {
    double s_max = 42.0 + (75.0 - 42.0) * (i % 41) / 40.0;
    LifeDraw draw = sample_life_draw(s_max, strip, strip_truth, 6022 + i);
    strip_data.push_back({"1", s_max, 0.0, draw.cycles, draw.failed});
  }
  MleOptions strip_opts = default_mle_options(ModelKind::MaxStress, false, 0.0);
  strip_opts.bounds.hi[kA3] = 60.0;
  strip_opts.n_starts = 2;
  DeltaProfile flat = profile_likelihood_delta(strip_data, strip_caches,
                                               ModelKind::MaxStress, grid, strip_opts);
  double lo = flat.points.front().loglik, hi = lo;
  for (const auto& pt : flat.points) {
    lo = std::min(lo, pt.loglik);
    hi = std::max(hi, pt.loglik);
  }
  out.require(hi - lo <= 1e-8, "strip profile varies by " + fmt(hi - lo));
  out.note("interval=[" + fmt(profile.interval_lo) + ", " + fmt(profile.interval_hi) +
           "], strip_span=" + fmt(hi - lo));
}

void mesh_convergence_regression(Outcome& out) {
  PoissonParams truth{SNParams{6.0, -1.2, 40.0, 0.6, 0.23}, 1.9, 0.0};

  // One dataset, generated on the finest mesh, refit on every level.
  SpecimenCache fine_cache = make_cache(specimen_defaults(2), 0.76, 4);
  std::vector<Experiment> data =
      simulate_specimen2(fine_cache, truth, 60, 57721, 26.0, 55.0);

  std::vector<double> a3;
  std::vector<int> triangles;
  std::optional<std::array<double, kParamCount>> warm;
  for (int level = 0; level <= 4; ++level) {
    SpecimenCache cache = make_cache(specimen_defaults(2), 0.76, level);
    CacheMap caches;
    caches.emplace("2", cache);
    MleOptions opts = default_mle_options(ModelKind::Poisson, false, 0.0);
    opts.bounds.hi[kA3] = 60.0;
    opts.seed = 46692;
    if (warm) {
      opts.initial = warm;
      opts.n_starts = 2;
    } else {
      opts.n_starts = 6;
    }
    FitResult fit = mle(data, caches, ModelKind::Poisson, opts);
    warm = fit.estimates;
    a3.push_back(fit.estimates[kA3]);
    triangles.push_back(cache.mesh->triangle_count());
  }
  double d2 = std::abs(a3[2] - a3[1]);
  double d3 = std::abs(a3[3] - a3[2]);
  double d4 = std::abs(a3[4] - a3[3]);
  out.require(d3 <= d2, "level-3 difference " + fmt(d3) + " > level-2 " + fmt(d2));
  out.require(d4 <= d3, "level-4 difference " + fmt(d4) + " > level-3 " + fmt(d3));
  std::ostringstream ss;
  ss << "A3 by level:";
  for (std::size_t i = 0; i < a3.size(); ++i)
    ss << " " << triangles[i] << ":" << fmt(a3[i]);
  out.note(ss.str());
}

void mcmc_validity(Outcome& out) {
  // Known 2D gaussian target.
  const double rho = 0.6;
  const double det = 1.0 - rho * rho;
  auto log_target = [&](const std::vector<double>& x) {
    double a = x[0] - 1.0, b = x[1] + 0.5;
    return -0.5 * (a * a - 2.0 * rho * a * b + b * b) / det;
  };
  BoxDomain box{{-10.0, -10.0}, {10.0, 10.0}};
  Chain gauss = run_metropolis(log_target, box, 60000, 991, 0.2);
  PosteriorSummary summary = posterior_summary(gauss);
  auto se = [&](int dim) {
    std::vector<double> values;
    for (int r = gauss.burn_in; r < static_cast<int>(gauss.samples.size()); ++r)
      values.push_back(gauss.samples[r][dim]);
    int batches = 40, per = static_cast<int>(values.size()) / 40;
    std::vector<double> means(batches, 0.0);
    for (int b = 0; b < batches; ++b)
      for (int i = 0; i < per; ++i) means[b] += values[b * per + i] / per;
    double grand = 0.0;
    for (double m : means) grand += m / batches;
    double var = 0.0;
    for (double m : means) var += (m - grand) * (m - grand) / (batches - 1);
    return std::sqrt(var / batches);
  };
  out.require(std::abs(summary.mean[0] - 1.0) <= 3.0 * se(0),
              "gaussian mean[0] off: " + fmt(summary.mean[0]));
  out.require(std::abs(summary.mean[1] + 0.5) <= 3.0 * se(1),
              "gaussian mean[1] off: " + fmt(summary.mean[1]));

  // Empty data: uniform marginals over the prior box.
  CacheMap caches;
  caches.emplace("1", make_cache(strip_config(), 0.25, 0));
  PriorBox prior;
  Chain flat = mcmc({}, caches, prior, 0.0, 100000, 17, 0.2);
  double worst_ks = 0.0;
  for (int dim = 0; dim < 6; ++dim) {
    std::vector<double> values;
    for (int r = flat.burn_in; r < static_cast<int>(flat.samples.size()); ++r)
      values.push_back(flat.samples[r][dim]);
    std::sort(values.begin(), values.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double model = (values[i] - prior.lo[dim]) / (prior.hi[dim] - prior.lo[dim]);
      ks = std::max(ks, std::abs((i + 1.0) / values.size() - model));
      ks = std::max(ks, std::abs(static_cast<double>(i) / values.size() - model));
    }
    worst_ks = std::max(worst_ks, ks);
  }
  out.require(worst_ks < 0.03, "uniform-box KS distance " + fmt(worst_ks));

  // Laplace-Metropolis against an analytic evidence.
  const double s = 0.35;
  auto log_lik = [&](const std::vector<double>& x) {
    double z = (x[0] - 0.3) / s;
    return -0.5 * z * z - std::log(s * std::sqrt(2.0 * M_PI));
  };
  BoxDomain line{{-4.0}, {4.0}};
  double log_prior = -std::log(8.0);
  Chain conjugate = run_metropolis(log_lik, line, 200000, 2718, 0.2, log_prior);
  double logml = laplace_metropolis_logml(conjugate);
  out.require(std::abs(logml - log_prior) <= 0.1,
              "log marginal likelihood " + fmt(logml) + " vs analytic " + fmt(log_prior));
  out.note("ks=" + fmt(worst_ks) + ", logml_err=" + fmt(std::abs(logml - log_prior)));
}

void conditional_naca_reproduction(Outcome& out) {
  const char* path = std::getenv("FATIGUE_NACA_DATASET1");
  if (path == nullptr || std::string(path).empty()) {
    out.skip("set FATIGUE_NACA_DATASET1 to a digitized dataset-1 CSV to enable");
    return;
  }
  std::vector<Experiment> data = read_dataset_csv(path);
  for (auto& e : data) e.specimen_id = "1";
  SpecimenCache cache = make_cache(specimen_defaults(1), 1.2, 2);
  CacheMap caches;
  caches.emplace("1", cache);
  MleOptions opts = default_mle_options(ModelKind::MaxStress, false, 0.0);
  opts.bounds.hi[kA3] = 60.0;
  opts.n_starts = 8;
  FitResult fit = mle(data, caches, ModelKind::MaxStress, opts);
  out.require(std::abs(fit.max_loglik + 950.16) <= 1.0,
              "log-likelihood " + fmt(fit.max_loglik) + " vs -950.16");
  const double expected[5] = {7.40, -2.01, 35.91, 0.5627, 0.5274};
  const int index[5] = {kA1, kA2, kA3, kQ, kTau};
  for (int i = 0; i < 5; ++i) {
    double rel = std::abs(fit.estimates[index[i]] - expected[i]) / std::abs(expected[i]);
    out.require(rel <= 0.05, std::string(kParamNames[index[i]]) + " off by " + fmt(rel));
  }
  out.note("loglik=" + fmt(fit.max_loglik));
}

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  // 0 = no limit
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {1, "uniform-stress consistency", 1.0, uniform_stress_consistency},
      {2, "FEM patch test", 1.0, fem_patch_test},
      {3, "stress concentration (plate with hole)", 30.0, stress_concentration},
      {4, "AIC arithmetic", 0.0, aic_arithmetic},
      {5, "boundary-surface quadrature", 0.0, quadrature_consistency},
      {6, "hazard/density identities", 0.0, hazard_density_identities},
      {7, "simulation-calibration recovery", 600.0, simulation_calibration_loop},
      {8, "profile likelihood over delta", 0.0, profile_likelihood_checks},
      {9, "mesh-convergence regression", 0.0, mesh_convergence_regression},
      {10, "MCMC validity", 0.0, mcmc_validity},
      {11, "conditional NACA dataset-1 reproduction", 0.0, conditional_naca_reproduction},
  };

  int failures = 0;
  for (auto& criterion : criteria) {
    Outcome outcome;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(outcome);
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.note(std::string("exception: ") + e.what());
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criterion.time_limit_s > 0.0 && elapsed > criterion.time_limit_s) {
      outcome.pass = false;
      outcome.note("runtime " + fmt(elapsed) + "s exceeds " + fmt(criterion.time_limit_s) +
                   "s");
    }
    const char* status = outcome.skipped ? "SKIP" : (outcome.pass ? "PASS" : "FAIL");
    if (!outcome.skipped && !outcome.pass) ++failures;
    std::printf("[%s] %2d %-42s (%6.2fs)%s%s\n", status, criterion.id, criterion.name,
                elapsed, outcome.detail.empty() ? "" : " ", outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed or skipped\n");
  return 0;
}
