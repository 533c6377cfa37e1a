#include "fatigue/run_config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fatigue/errors.hpp"

namespace fatigue {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f.good()) throw ValidationError("cannot open config file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

double required_number(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw ValidationError("config " + path + " is missing numeric key '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

GeometryConfig load_geometry_config(const std::string& path) {
  json j = load_json(path);
  GeometryConfig config;
  std::string kind = j.value("kind", "");
  if (kind == "unnotched_dogbone") {
    config.kind = SpecimenKind::UnnotchedDogbone;
  } else if (kind == "edge_notched") {
    config.kind = SpecimenKind::EdgeNotched;
  } else {
    throw ValidationError("geometry config " + path +
                          ": kind must be 'unnotched_dogbone' or 'edge_notched'");
  }
  config.w_max_in = required_number(j, "w_max_in", path);
  config.w_min_in = required_number(j, "w_min_in", path);
  config.notch_radius_in = required_number(j, "notch_radius_in", path);
  config.half_length_in = required_number(j, "half_length_in", path);
  config.thickness_in = required_number(j, "thickness_in", path);
  return config;
}

void save_geometry_config(const GeometryConfig& config, const std::string& path) {
  json j;
  j["kind"] = config.kind == SpecimenKind::UnnotchedDogbone ? "unnotched_dogbone"
                                                            : "edge_notched";
  j["w_max_in"] = config.w_max_in;
  j["w_min_in"] = config.w_min_in;
  j["notch_radius_in"] = config.notch_radius_in;
  j["half_length_in"] = config.half_length_in;
  j["thickness_in"] = config.thickness_in;
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << j.dump(2) << '\n';
}

RunConfig load_run_config(const std::string& path) {
  json j = load_json(path);
  RunConfig config;
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  if (j.contains("geometries")) {
    for (auto& [id, value] : j["geometries"].items())
      config.geometry_paths[id] = resolve(value.get<std::string>());
  } else if (j.contains("geometry")) {
    config.geometry_paths["1"] = resolve(j["geometry"].get<std::string>());
  } else {
    throw ValidationError("run config " + path +
                          " needs a 'geometry' path or a 'geometries' map");
  }
  for (const auto& [id, geom_path] : config.geometry_paths) {
    if (!std::filesystem::exists(geom_path))
      throw ValidationError("geometry config for specimen '" + id +
                            "' not found: " + geom_path);
  }

  if (j.contains("material")) {
    config.material.e_ksi = j["material"].value("e_ksi", config.material.e_ksi);
    config.material.nu = j["material"].value("nu", config.material.nu);
  }
  config.mesh_level = j.value("mesh_level", config.mesh_level);
  if (config.mesh_level < 0) throw ValidationError("mesh_level must be >= 0");
  config.mesh_h_in = j.value("mesh_h_in", config.mesh_h_in);
  if (j.contains("delta_grid_in"))
    config.delta_grid_in = j["delta_grid_in"].get<std::vector<double>>();

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    config.optimizer.n_starts = o.value("starts", config.optimizer.n_starts);
    config.optimizer.seed = o.value("seed", config.optimizer.seed);
    config.optimizer.max_iterations =
        o.value("max_iterations", config.optimizer.max_iterations);
    if (o.contains("bounds")) {
      for (int k = 0; k < kParamCount; ++k) {
        if (o["bounds"].contains(kParamNames[k])) {
          auto pair = o["bounds"][kParamNames[k]].get<std::vector<double>>();
          if (pair.size() != 2)
            throw ValidationError(std::string("bounds for ") + kParamNames[k] +
                                  " must be [lo, hi]");
          config.optimizer.bounds.lo[k] = pair[0];
          config.optimizer.bounds.hi[k] = pair[1];
        }
      }
    }
    if (config.optimizer.n_starts < 1) throw ValidationError("starts must be >= 1");
  }
  if (j.contains("mcmc")) {
    const json& m = j["mcmc"];
    config.mcmc.n_iter = m.value("n_iter", config.mcmc.n_iter);
    config.mcmc.seed = m.value("seed", config.mcmc.seed);
    config.mcmc.burn_in_fraction = m.value("burn_in_fraction", config.mcmc.burn_in_fraction);
    if (config.mcmc.n_iter < 1000) throw ValidationError("mcmc n_iter must be >= 1000");
  }
  if (j.contains("output_dir")) config.output_dir = resolve(j["output_dir"]);
  return config;
}

SpecimenState prepare_specimen(const SpecimenGeometry& geom, const MaterialParams& mat,
                               int mesh_level, double h) {
  if (h <= 0.0) h = default_edge_length(geom);
  TriMesh mesh = triangulate(geom, h);
  for (int level = 0; level < mesh_level; ++level) mesh = refine(mesh);
  SpecimenState state;
  state.geometry = geom;
  state.mesh = std::make_shared<TriMesh>(std::move(mesh));
  DisplacementField u = assemble_solve(*state.mesh, mat);
  state.field = recover_stress(*state.mesh, u, mat);
  return state;
}

CacheMap build_caches(const RunConfig& config) {
  CacheMap caches;
  for (const auto& [id, path] : config.geometry_paths) {
    SpecimenGeometry geom = build_geometry(load_geometry_config(path));
    SpecimenState state =
        prepare_specimen(geom, config.material, config.mesh_level, config.mesh_h_in);
    caches.emplace(id, build_specimen_cache(state.mesh, state.field, geom,
                                            config.delta_grid_in));
  }
  return caches;
}

void write_fit_report_json(const FitResult& fit, ModelKind model, std::uint64_t seed,
                           int mesh_level, const std::string& path) {
  json j;
  j["model"] = model == ModelKind::MaxStress ? "max_stress" : "poisson";
  json estimates;
  for (int k = 0; k < kParamCount; ++k) estimates[kParamNames[k]] = fit.estimates[k];
  j["estimates"] = estimates;
  j["max_loglik"] = fit.max_loglik;
  j["aic"] = fit.aic;
  j["converged"] = fit.converged;
  j["n_evals"] = fit.n_evals;
  j["n_free"] = fit.n_free;
  json bounds;
  for (int k = 0; k < kParamCount; ++k)
    bounds[kParamNames[k]] = {fit.bounds.lo[k], fit.bounds.hi[k]};
  j["bounds"] = bounds;
  j["seed"] = seed;
  j["mesh_level"] = mesh_level;
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << j.dump(2) << '\n';
}

std::array<double, kParamCount> load_params_json(const std::string& path) {
  json j = load_json(path);
  const json& src = j.contains("estimates") ? j["estimates"] : j;
  std::array<double, kParamCount> params{};
  for (int k = 0; k < kParamCount; ++k) {
    if (!src.contains(kParamNames[k]))
      throw ValidationError("params file " + path + " is missing '" + kParamNames[k] +
                            "'");
    params[k] = src[kParamNames[k]].get<double>();
  }
  return params;
}

}  // namespace fatigue
