// Command-line pipeline: meshing, unit-traction solves, calibration, MCMC,
// survival surfaces, simulation, and mesh-convergence studies. All logic
// lives in the fatigue library; this file only wires flags to library calls.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fatigue/bayes.hpp"
#include "fatigue/calibrate.hpp"
#include "fatigue/dataset.hpp"
#include "fatigue/errors.hpp"
#include "fatigue/run_config.hpp"

namespace {

using namespace fatigue;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> mesh_level;
  std::string delta = "0";  // fixed value or "free"
  std::string specimen;
  std::string model = "poisson";
  std::vector<std::string> datasets;
};

RunConfig load_config(GlobalOptions& opts) {
  if (opts.config_path.empty()) throw ValidationError("--config is required");
  RunConfig config = load_run_config(opts.config_path);
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (opts.seed) {
    config.optimizer.seed = *opts.seed;
    config.mcmc.seed = *opts.seed;
  }
  if (opts.mesh_level) config.mesh_level = *opts.mesh_level;
  std::filesystem::create_directories(config.output_dir);
  return config;
}

std::string pick_specimen(const RunConfig& config, const GlobalOptions& opts) {
  if (!opts.specimen.empty()) {
    if (!config.geometry_paths.count(opts.specimen))
      throw ValidationError("unknown specimen id '" + opts.specimen + "'");
    return opts.specimen;
  }
  return config.geometry_paths.begin()->first;
}

std::vector<Experiment> load_datasets(const GlobalOptions& opts) {
  if (opts.datasets.empty()) throw ValidationError("at least one dataset CSV is required");
  std::vector<Experiment> data;
  for (const auto& path : opts.datasets) {
    std::vector<Experiment> part = read_dataset_csv(path);
    data.insert(data.end(), part.begin(), part.end());
  }
  if (data.empty()) throw ValidationError("dataset is empty");
  return data;
}

ModelKind parse_model(const std::string& model) {
  if (model == "max-stress" || model == "max_stress") return ModelKind::MaxStress;
  if (model == "poisson") return ModelKind::Poisson;
  throw ValidationError("--model must be 'max-stress' or 'poisson'");
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (std::filesystem::path(config.output_dir) / name).string();
}

MleOptions make_mle_options(const RunConfig& config, ModelKind model,
                            const std::string& delta_flag) {
  bool delta_free = delta_flag == "free";
  double fixed_delta = delta_free ? 0.0 : std::stod(delta_flag);
  MleOptions opts = default_mle_options(model, delta_free, fixed_delta);
  opts.n_starts = config.optimizer.n_starts;
  opts.seed = config.optimizer.seed;
  opts.max_iterations = config.optimizer.max_iterations;
  opts.bounds = config.optimizer.bounds;
  if (!delta_free && !config.delta_grid_in.empty())
    opts.bounds.hi[kDelta] = std::max(opts.bounds.hi[kDelta], fixed_delta);
  return opts;
}

int cmd_mesh(GlobalOptions& opts) {
  RunConfig config = load_config(opts);
  for (const auto& [id, path] : config.geometry_paths) {
    SpecimenGeometry geom = build_geometry(load_geometry_config(path));
    double h = config.mesh_h_in > 0.0 ? config.mesh_h_in : default_edge_length(geom);
    TriMesh mesh = triangulate(geom, h);
    for (int level = 0; level < config.mesh_level; ++level) mesh = refine(mesh);
    write_mesh_csv(mesh, out_path(config, id + "_nodes.csv"),
                   out_path(config, id + "_triangles.csv"),
                   out_path(config, id + "_edges.csv"));
    std::printf("specimen %s: %d nodes, %d triangles, surface measure %.6g in^2\n",
                id.c_str(), mesh.node_count(), mesh.triangle_count(),
                surface_measure(mesh, geom.thickness_in));
  }
  return 0;
}

int cmd_solve(GlobalOptions& opts) {
  RunConfig config = load_config(opts);
  double delta = opts.delta == "free" ? 0.0 : std::stod(opts.delta);
  for (const auto& [id, path] : config.geometry_paths) {
    SpecimenGeometry geom = build_geometry(load_geometry_config(path));
    SpecimenState state =
        prepare_specimen(geom, config.material, config.mesh_level, config.mesh_h_in);
    write_field_csv(*state.mesh, state.field, out_path(config, id + "_field.csv"));
    SpecimenCache cache =
        build_specimen_cache(state.mesh, state.field, geom, {0.0, delta});
    std::vector<double> averaged = cache.profile_at(delta);
    write_profile_csv(*state.mesh, cache.quad, cache.unit_eff, averaged,
                      out_path(config, id + "_profile.csv"));
    double max_eff = *std::max_element(cache.unit_eff.begin(), cache.unit_eff.end());
    std::printf("specimen %s: max unit effective stress %.6g\n", id.c_str(), max_eff);
  }
  return 0;
}

int cmd_fit(GlobalOptions& opts) {
  RunConfig config = load_config(opts);
  std::vector<Experiment> data = load_datasets(opts);
  CacheMap caches = build_caches(config);
  ModelKind model = parse_model(opts.model);
  MleOptions mle_opts = make_mle_options(config, model, opts.delta);
  FitResult fit = mle(data, caches, model, mle_opts);
  std::string report = out_path(config, "fit_report.json");
  write_fit_report_json(fit, model, mle_opts.seed, config.mesh_level, report);
  std::printf("loglik %.6f aic %.6f converged %d -> %s\n", fit.max_loglik, fit.aic,
              fit.converged ? 1 : 0, report.c_str());
  return 0;
}

int cmd_profile(GlobalOptions& opts) {
  RunConfig config = load_config(opts);
  std::vector<Experiment> data = load_datasets(opts);
  CacheMap caches = build_caches(config);
  ModelKind model = parse_model(opts.model);
  MleOptions base = make_mle_options(config, model, "0");
  DeltaProfile profile =
      profile_likelihood_delta(data, caches, model, config.delta_grid_in, base);
  std::string path = out_path(config, "profile.csv");
  std::ofstream f(path);
  f << "delta_in,loglik\n";
  char buf[96];
  for (const auto& point : profile.points) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", point.delta, point.loglik);
    f << buf;
  }
  std::printf("profile max at delta %.6g, ~95%% interval [%.6g, %.6g] -> %s\n",
              profile.max_delta, profile.interval_lo, profile.interval_hi, path.c_str());
  return 0;
}

int cmd_mcmc(GlobalOptions& opts) {
  RunConfig config = load_config(opts);
  std::vector<Experiment> data = load_datasets(opts);
  CacheMap caches = build_caches(config);
  double delta = opts.delta == "free" ? 0.0 : std::stod(opts.delta);
  PriorBox prior;
  Chain chain = mcmc(data, caches, prior, delta, config.mcmc.n_iter, config.mcmc.seed,
                     config.mcmc.burn_in_fraction);
  write_chain_csv(chain, out_path(config, "chain.csv"));

  PosteriorSummary summary = posterior_summary(chain);
  auto log_lik = [&](const std::vector<double>& x) {
    std::array<double, kParamCount> params{x[0], x[1], x[2], x[3], x[4], x[5], delta};
    return model_log_likelihood(data, caches, ModelKind::Poisson, params);
  };
  DicResult dic_result = dic(chain, log_lik);
  double logml = laplace_metropolis_logml(chain);

  nlohmann::json j;
  const char* names[6] = {"a1", "a2", "a3", "q", "tau", "beta"};
  for (int i = 0; i < 6; ++i) {
    j["posterior"][names[i]] = {{"mean", summary.mean[i]}, {"sd", summary.sd[i]},
                                {"q025", summary.q025[i]}, {"q500", summary.q500[i]},
                                {"q975", summary.q975[i]}};
  }
  j["correlation"] = summary.correlation;
  j["acceptance_rate"] = chain.acceptance_rate;
  j["dic"] = dic_result.dic;
  j["p_d"] = dic_result.p_d;
  j["log_marginal_likelihood"] = logml;
  j["delta"] = delta;
  j["n_iter"] = config.mcmc.n_iter;
  j["seed"] = config.mcmc.seed;
  std::ofstream f(out_path(config, "summary.json"));
  f << j.dump(2) << '\n';
  std::printf("acceptance %.3f dic %.4f logml %.4f -> %s\n", chain.acceptance_rate,
              dic_result.dic, logml, out_path(config, "summary.json").c_str());
  return 0;
}

int cmd_survival(GlobalOptions& opts, const std::string& params_path, double smax_min,
                 double smax_max, int smax_steps, double n_min, double n_max, int n_steps,
                 double ratio_r) {
  RunConfig config = load_config(opts);
  std::array<double, kParamCount> params = load_params_json(params_path);
  std::string id = pick_specimen(config, opts);
  SpecimenGeometry geom = build_geometry(load_geometry_config(config.geometry_paths.at(id)));
  SpecimenState state =
      prepare_specimen(geom, config.material, config.mesh_level, config.mesh_h_in);
  SpecimenCache cache = build_specimen_cache(state.mesh, state.field, geom,
                                             {0.0, params[kDelta]});
  PoissonParams p{SNParams{params[kA1], params[kA2], params[kA3], params[kQ], params[kTau]},
                  params[kBeta], params[kDelta]};

  std::string path = out_path(config, id + "_survival_grid.csv");
  std::ofstream f(path);
  f << "s_max_ksi,traction_ksi,n,survival\n";
  char buf[160];
  for (int i = 0; i < smax_steps; ++i) {
    double s_max = smax_min + (smax_max - smax_min) *
                                  (smax_steps == 1 ? 0.0 : static_cast<double>(i) /
                                                               (smax_steps - 1));
    double traction = traction_scale(s_max, ratio_r, p.sn.q, cache.width_ratio);
    for (int k = 0; k < n_steps; ++k) {
      double log_n = std::log10(n_min) +
                     (std::log10(n_max) - std::log10(n_min)) *
                         (n_steps == 1 ? 0.0 : static_cast<double>(k) / (n_steps - 1));
      double n = std::pow(10.0, log_n);
      double s = survival(n, traction, cache, p);
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.12g\n", s_max, traction, n, s);
      f << buf;
    }
  }
  std::printf("survival grid (%d x %d) -> %s\n", smax_steps, n_steps, path.c_str());
  return 0;
}

int cmd_simulate(GlobalOptions& opts, const std::string& params_path, int count,
                 double smax_min, double smax_max, double ratio_r, double censor) {
  RunConfig config = load_config(opts);
  std::array<double, kParamCount> params = load_params_json(params_path);
  std::string id = pick_specimen(config, opts);
  SpecimenGeometry geom = build_geometry(load_geometry_config(config.geometry_paths.at(id)));
  SpecimenState state =
      prepare_specimen(geom, config.material, config.mesh_level, config.mesh_h_in);
  SpecimenCache cache = build_specimen_cache(state.mesh, state.field, geom,
                                             {0.0, params[kDelta]});
  PoissonParams p{SNParams{params[kA1], params[kA2], params[kA3], params[kQ], params[kTau]},
                  params[kBeta], params[kDelta]};

  std::uint64_t seed = opts.seed.value_or(config.optimizer.seed);
  std::vector<Experiment> data;
  data.reserve(count);
  for (int i = 0; i < count; ++i) {
    double s_max = smax_min + (smax_max - smax_min) *
                                  (count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    double traction = traction_scale(s_max, ratio_r, p.sn.q, cache.width_ratio);
    LifeDraw draw = sample_life_draw(traction, cache, p, seed + i, censor);
    Experiment exp;
    exp.specimen_id = id;
    exp.s_max_ksi = s_max;
    exp.ratio_r = ratio_r;
    exp.cycles = draw.cycles;
    exp.failed = draw.failed;
    data.push_back(std::move(exp));
  }
  std::string path = out_path(config, "simulated.csv");
  write_dataset_csv(data, path);
  std::printf("%d simulated experiments -> %s\n", count, path.c_str());
  return 0;
}

int cmd_converge(GlobalOptions& opts, int levels) {
  RunConfig config = load_config(opts);
  std::vector<Experiment> data = load_datasets(opts);
  ModelKind model = parse_model(opts.model);
  double fixed_delta = opts.delta == "free" ? 0.0 : std::stod(opts.delta);

  std::string path = out_path(config, "converge.csv");
  std::ofstream f(path);
  f << "level,n_triangles,a1,a2,a3,q,tau,beta,loglik\n";
  char buf[256];
  std::optional<std::array<double, kParamCount>> warm;
  for (int level = 0; level < levels; ++level) {
    RunConfig level_config = config;
    level_config.mesh_level = level;
    CacheMap caches = build_caches(level_config);
    int n_tri = caches.begin()->second.mesh->triangle_count();
    MleOptions mle_opts = make_mle_options(config, model, opts.delta);
    mle_opts.fixed_values[kDelta] = fixed_delta;
    if (warm) {
      mle_opts.initial = warm;
      mle_opts.n_starts = std::max(2, config.optimizer.n_starts / 4);
    }
    FitResult fit = mle(data, caches, model, mle_opts);
    warm = fit.estimates;
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.10g\n", level,
                  n_tri, fit.estimates[kA1], fit.estimates[kA2], fit.estimates[kA3],
                  fit.estimates[kQ], fit.estimates[kTau], fit.estimates[kBeta],
                  fit.max_loglik);
    f << buf;
    std::printf("level %d (%d triangles): loglik %.4f\n", level, n_tri, fit.max_loglik);
  }
  std::printf("-> %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial Poisson fatigue crack-initiation modeling pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "run config JSON path");
  app.add_option("--out", opts.out_dir, "output directory (overrides config)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "seed override");
  int level_value = 0;
  auto* level_opt = app.add_option("--mesh-level", level_value, "mesh level override");
  app.add_option("--delta", opts.delta, "averaging length in inches, or 'free'");
  app.add_option("--specimen", opts.specimen, "specimen id for single-specimen commands");

  app.add_subcommand("mesh", "triangulate and export meshes");
  app.add_subcommand("solve", "solve unit traction and export stress fields");

  auto* fit = app.add_subcommand("fit", "maximum-likelihood calibration");
  fit->add_option("--model", opts.model, "max-stress or poisson");
  fit->add_option("datasets", opts.datasets, "dataset CSV paths")->required();

  auto* profile = app.add_subcommand("profile", "profile likelihood over delta");
  profile->add_option("--model", opts.model, "max-stress or poisson");
  profile->add_option("datasets", opts.datasets, "dataset CSV paths")->required();

  auto* mcmc_cmd = app.add_subcommand("mcmc", "posterior sampling at fixed delta");
  mcmc_cmd->add_option("datasets", opts.datasets, "dataset CSV paths")->required();

  auto* surv = app.add_subcommand("survival", "survival-probability grid");
  std::string params_path;
  double smax_min = 20, smax_max = 60, n_min = 1e4, n_max = 1e7, ratio_r = 0.0;
  int smax_steps = 25, n_steps = 40;
  surv->add_option("--params", params_path, "fit report or params JSON")->required();
  surv->add_option("--smax-min", smax_min);
  surv->add_option("--smax-max", smax_max);
  surv->add_option("--smax-steps", smax_steps);
  surv->add_option("--n-min", n_min);
  surv->add_option("--n-max", n_max);
  surv->add_option("--n-steps", n_steps);
  surv->add_option("--r", ratio_r, "cycle ratio R");

  auto* sim = app.add_subcommand("simulate", "draw synthetic experiments");
  std::string sim_params;
  int sim_count = 100;
  double sim_smax_min = 30, sim_smax_max = 60, sim_r = 0.0, sim_censor = 1e7;
  sim->add_option("--params", sim_params, "fit report or params JSON")->required();
  sim->add_option("--n", sim_count, "number of experiments");
  sim->add_option("--smax-min", sim_smax_min);
  sim->add_option("--smax-max", sim_smax_max);
  sim->add_option("--r", sim_r, "cycle ratio R");
  sim->add_option("--censor", sim_censor, "run-out cycle count");

  auto* conv = app.add_subcommand("converge", "refit across refinement levels");
  int conv_levels = 5;
  conv->add_option("--model", opts.model, "max-stress or poisson");
  conv->add_option("--levels", conv_levels, "number of refinement levels");
  conv->add_option("datasets", opts.datasets, "dataset CSV paths")->required();

  try {
    app.parse(argc, argv);
    if (!seed_opt->empty()) opts.seed = seed_value;
    if (!level_opt->empty()) opts.mesh_level = level_value;

    if (app.got_subcommand("mesh")) return cmd_mesh(opts);
    if (app.got_subcommand("solve")) return cmd_solve(opts);
    if (app.got_subcommand("fit")) return cmd_fit(opts);
    if (app.got_subcommand("profile")) return cmd_profile(opts);
    if (app.got_subcommand("mcmc")) return cmd_mcmc(opts);
    if (app.got_subcommand("survival"))
      return cmd_survival(opts, params_path, smax_min, smax_max, smax_steps, n_min, n_max,
                          n_steps, ratio_r);
    if (app.got_subcommand("simulate"))
      return cmd_simulate(opts, sim_params, sim_count, sim_smax_min, sim_smax_max, sim_r,
                          sim_censor);
    if (app.got_subcommand("converge")) return cmd_converge(opts, conv_levels);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const fatigue::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
