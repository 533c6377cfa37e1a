#pragma once

#include <string>
#include <vector>

#include "fatigue/geometry.hpp"

namespace fatigue {

struct MaterialParams {
  double e_ksi = 10400.0;  ///< modulus of elasticity
  double nu = 0.33;        ///< Poisson's ratio

  double shear_modulus() const { return e_ksi / (2.0 * (1.0 + nu)); }
};

struct DisplacementField {
  std::vector<double> ux;
  std::vector<double> uy;
};

/// Nodal plane-stress tensor for a unit traction applied on B1.
/// Stresses scale linearly with the applied traction.
struct UnitStressField {
  std::vector<double> sx;
  std::vector<double> sy;
  std::vector<double> txy;

  int node_count() const { return static_cast<int>(sx.size()); }
};

/// Solves plane-stress elasticity on the quarter domain with unit traction
/// sigma_x = 1 on B1, free boundaries on B2/B3, and symmetry conditions
/// (zero normal displacement) on B4/B5. Uses linear triangles and a direct
/// sparse factorization with deterministic ordering; one step of iterative
/// refinement keeps the relative residual below 1e-10.
DisplacementField assemble_solve(const TriMesh& mesh, const MaterialParams& mat);

/// Element-constant stresses from the constitutive law, averaged to nodes
/// with element-area weights.
UnitStressField recover_stress(const TriMesh& mesh, const DisplacementField& u,
                               const MaterialParams& mat);

/// Traction multiplier for an experiment: (W_min/W_max) * S_max * (1-R)^q.
/// Throws std::domain_error when R >= 1.
double traction_scale(double s_max_ksi, double ratio_r, double q, double width_ratio);

/// Pointwise scaling of the unit field by the experiment traction.
UnitStressField scale_stress(const UnitStressField& field, double s_max_ksi,
                             double ratio_r, double q, const SpecimenGeometry& geom);

/// Elementwise internal force vector K*u (size 2*n, [ux0, uy0, ux1, ...]);
/// used for equilibrium checks.
std::vector<double> internal_forces(const TriMesh& mesh, const MaterialParams& mat,
                                    const DisplacementField& u);

/// Strain energy 1/2 * integral(sigma : eps); defines the energy norm used
/// in refinement studies.
double strain_energy(const TriMesh& mesh, const MaterialParams& mat,
                     const DisplacementField& u);

/// Per-node CSV export (x, y, sx, sy, txy).
void write_field_csv(const TriMesh& mesh, const UnitStressField& field,
                     const std::string& path);

}  // namespace fatigue
