#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fatigue/sn_model.hpp"
#include "fatigue/stress_field.hpp"

namespace fatigue {

/// Full parameter vector of the spatial Poisson model: the S-N parameters
/// plus the highly-stressed-volume threshold and the averaging length.
struct PoissonParams {
  SNParams sn;
  double beta = 1.0;   ///< unit-stress threshold defining the highly stressed volume
  double delta = 0.0;  ///< averaging length, in
};

/// One fatigue experiment; failed == false marks a run-out (right-censored).
struct Experiment {
  std::string specimen_id = "1";
  double s_max_ksi = 0.0;
  double ratio_r = 0.0;
  double cycles = 0.0;
  bool failed = false;
};

/// Precomputed per-specimen surface data: quadrature weights, the unit
/// pointwise effective stress, and unit averaged profiles on a delta grid
/// (linearly interpolated in delta between grid points, recomputed exactly
/// on request).
struct SpecimenCache {
  SurfaceQuadrature quad;
  std::vector<double> unit_eff;            ///< pointwise sigma_eff per site, unit traction
  std::vector<double> delta_grid;          ///< ascending, starts at 0
  std::vector<std::vector<double>> averaged;  ///< one profile per delta grid value
  double width_ratio = 1.0;                ///< W_min / W_max
  double thickness_in = 0.0;
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const StressInterpolant> interpolant;

  /// Unit averaged profile at an arbitrary delta (interpolated on the grid;
  /// exact at grid points). Throws std::domain_error outside the grid range.
  void profile_at(double delta, std::vector<double>& out) const;
  std::vector<double> profile_at(double delta) const;

  /// Profile recomputed by direct averaging (no grid interpolation).
  std::vector<double> exact_profile(double delta, int subgrid =
                                    StressInterpolant::kDefaultSubgrid) const;

  double max_profile(double delta) const;
  double gamma(double beta) const;  ///< highly stressed volume, 0 when empty
};

SpecimenCache build_specimen_cache(std::shared_ptr<const TriMesh> mesh,
                                   const UnitStressField& field,
                                   const SpecimenGeometry& geom,
                                   std::vector<double> delta_grid = {0.0},
                                   int subgrid = StressInterpolant::kDefaultSubgrid);

using CacheMap = std::map<std::string, SpecimenCache>;

/// Survival probability of the whole specimen after n cycles under traction
/// T: exp((1/gamma) * integral of log(1 - F_SN) over the boundary surface).
double survival(double n, double traction, const SpecimenCache& cache,
                const PoissonParams& p);

/// Density of the number of cycles at first crack initiation:
/// survival * (1/gamma) * integral of the S-N hazard.
double first_crack_density(double n, double traction, const SpecimenCache& cache,
                           const PoissonParams& p);

/// Censored log-likelihood of the spatial Poisson model. Experiments are
/// matched to caches by specimen_id; gamma is evaluated per specimen with
/// the shared threshold beta. Returns -infinity for impossible observations
/// (never throws for them). Throws ValidationError for an unknown
/// specimen_id.
double poisson_log_likelihood(const std::vector<Experiment>& data, const CacheMap& caches,
                              const PoissonParams& p);

/// Censored log-likelihood of the max-stress model: each experiment sees the
/// single stress T * max(averaged unit profile).
double max_stress_log_likelihood(const std::vector<Experiment>& data,
                                 const CacheMap& caches, const SNParams& sn, double delta);

/// Per-experiment boundary integrals entering the censored likelihood:
/// integral of log(1 - F) and, for failures, the hazard integral. Both are
/// independent of beta, which enters the likelihood only through gamma.
struct BoundaryIntegralTerms {
  std::vector<double> log_survival;  ///< per experiment
  std::vector<double> hazard;        ///< per experiment, 0 for run-outs
  std::vector<int> specimen_index;   ///< per experiment, into specimen_ids
  std::vector<std::string> specimen_ids;
};

BoundaryIntegralTerms boundary_integral_terms(const std::vector<Experiment>& data,
                                              const CacheMap& caches, const SNParams& sn,
                                              double delta);

/// Distinct unit-stress levels of a specimen with the surface measure lying
/// strictly above each; gamma(beta) is constant between consecutive levels.
struct GammaLadder {
  std::vector<double> values;       ///< ascending distinct unit effective stress
  std::vector<double> measure_above;  ///< measure of {unit_eff > values[j]}
  double total = 0.0;               ///< gamma for beta below all levels

  double gamma(double beta) const;
};

GammaLadder build_gamma_ladder(const SpecimenCache& cache);

struct LifeDraw {
  double cycles = 0.0;
  bool failed = false;
  double u = 0.0;  ///< the uniform variate the draw inverted
};

/// Inverse-CDF simulation of one experiment at traction T: run-out at
/// censor_cycles when survival(censor) >= U, otherwise the failure time
/// solving survival(n) = U by bisection on log n. Deterministic given seed.
LifeDraw sample_life_draw(double traction, const SpecimenCache& cache,
                          const PoissonParams& p, std::uint64_t seed,
                          double censor_cycles = 1e7);

/// Convenience wrapper returning an Experiment row (R = 0, S_max chosen so
/// that the traction matches for any q).
Experiment sample_life(double traction, const SpecimenCache& cache, const PoissonParams& p,
                       std::uint64_t seed, double censor_cycles = 1e7,
                       const std::string& specimen_id = "1");

}  // namespace fatigue
