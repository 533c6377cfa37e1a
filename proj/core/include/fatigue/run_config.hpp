#pragma once

#include <map>
#include <string>
#include <vector>

#include "fatigue/calibrate.hpp"
#include "fatigue/elasticity.hpp"
#include "fatigue/geometry.hpp"

namespace fatigue {

/// Geometry config JSON: keys kind, w_max_in, w_min_in, notch_radius_in,
/// half_length_in, thickness_in.
GeometryConfig load_geometry_config(const std::string& path);
void save_geometry_config(const GeometryConfig& config, const std::string& path);

struct OptimizerSettings {
  int n_starts = 8;
  std::uint64_t seed = 20260809;
  int max_iterations = 4000;
  ParamBounds bounds = default_bounds();
};

struct McmcSettings {
  int n_iter = 20000;
  std::uint64_t seed = 20260809;
  double burn_in_fraction = 0.2;
};

/// Top-level run configuration. Relative paths are resolved against the
/// directory containing the config file.
struct RunConfig {
  std::map<std::string, std::string> geometry_paths;  ///< specimen id -> config path
  MaterialParams material;
  int mesh_level = 2;
  double mesh_h_in = 0.0;  ///< 0 = per-geometry default
  std::vector<double> delta_grid_in{0.0, 0.00625, 0.0125, 0.025, 0.05};
  OptimizerSettings optimizer;
  McmcSettings mcmc;
  std::string output_dir = "out";
};

RunConfig load_run_config(const std::string& path);

/// Mesh + solved unit stress state for one specimen at the configured level.
struct SpecimenState {
  SpecimenGeometry geometry;
  std::shared_ptr<const TriMesh> mesh;
  UnitStressField field;
};

SpecimenState prepare_specimen(const SpecimenGeometry& geom, const MaterialParams& mat,
                               int mesh_level, double h = 0.0);

/// Builds all specimen caches referenced by the config.
CacheMap build_caches(const RunConfig& config);

void write_fit_report_json(const FitResult& fit, ModelKind model, std::uint64_t seed,
                           int mesh_level, const std::string& path);

/// Reads estimates back from a fit report (or any JSON object carrying the
/// parameter keys a1, a2, a3, q, tau, beta, delta).
std::array<double, kParamCount> load_params_json(const std::string& path);

}  // namespace fatigue
