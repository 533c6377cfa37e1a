#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fatigue/elasticity.hpp"
#include "fatigue/geometry.hpp"

namespace fatigue {

/// Maximum principal stress of a 2D tensor.
double effective_stress(double sx, double sy, double txy);

/// Node sites and weights approximating the boundary-surface integral of the
/// 3D specimen: thickness-weighted trapezoids along the boundary polyline
/// plus twice the triangle vertex rule over the face.
struct SurfaceQuadrature {
  std::vector<double> lateral;  ///< thickness * half of incident boundary edges
  std::vector<double> face;     ///< 2 * (1/3 sum of incident triangle areas)

  int site_count() const { return static_cast<int>(lateral.size()); }
  double weight(int k) const { return lateral[k] + face[k]; }
  double total() const;
};

SurfaceQuadrature build_surface_quadrature(const TriMesh& mesh, double thickness_in);

/// Uniform-bin point location over a triangulation.
class TriLocator {
 public:
  explicit TriLocator(const TriMesh& mesh);

  /// Index of a triangle containing p (boundary inclusive), or -1.
  int find(Vec2 p) const;

 private:
  const TriMesh* mesh_;
  double x0_, y0_, cell_;
  int nx_, ny_;
  std::vector<std::vector<std::int32_t>> bins_;
};

/// P1 interpolant of the nodal effective stress with local square averaging.
class StressInterpolant {
 public:
  static constexpr int kDefaultSubgrid = 8;

  StressInterpolant(std::shared_ptr<const TriMesh> mesh, const UnitStressField& field);

  /// Pointwise effective stress at x. Throws std::domain_error outside the
  /// domain closure.
  double effective_at(Vec2 x) const;

  /// Mean of the effective stress over the square of side delta centered at
  /// x, intersected with the domain, on a subgrid x subgrid midpoint grid.
  /// delta == 0 falls back to effective_at.
  double averaged_at(Vec2 x, double delta, int subgrid = kDefaultSubgrid) const;

  const std::vector<double>& node_values() const { return node_values_; }
  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  std::vector<double> node_values_;
  TriLocator locator_;
};

double averaged_effective_stress(const StressInterpolant& interp, double delta, Vec2 x);

/// Averaged effective stress evaluated at every mesh node, for one delta.
struct AveragedStressProfile {
  std::vector<double> values;
  double delta = 0.0;
  std::shared_ptr<const TriMesh> mesh;
};

AveragedStressProfile build_averaged_profile(const StressInterpolant& interp, double delta,
                                             int subgrid = StressInterpolant::kDefaultSubgrid);

/// Surface measure of the region where the unit effective stress exceeds
/// beta. Throws std::domain_error when the region is empty (the Poisson
/// likelihood is undefined there).
double highly_stressed_volume(const std::vector<double>& unit_eff,
                              const SurfaceQuadrature& quad, double beta);

/// Same, returning 0 instead of throwing; used inside likelihoods where an
/// empty region maps to -infinity.
double highly_stressed_volume_or_zero(const std::vector<double>& unit_eff,
                                      const SurfaceQuadrature& quad, double beta);

/// Site export: x, y, weight, pointwise and averaged unit effective stress.
void write_profile_csv(const TriMesh& mesh, const SurfaceQuadrature& quad,
                       const std::vector<double>& unit_eff,
                       const std::vector<double>& averaged, const std::string& path);

}  // namespace fatigue
