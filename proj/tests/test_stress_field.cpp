#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "fatigue/elasticity.hpp"
#include "fatigue/geometry.hpp"
#include "fatigue/stress_field.hpp"

using namespace fatigue;

namespace {

GeometryConfig strip_config(double full_width = 1.0, double half_length = 2.0) {
  GeometryConfig c;
  c.kind = SpecimenKind::EdgeNotched;
  c.w_max_in = full_width;
  c.w_min_in = full_width;
  c.notch_radius_in = 0.25 * full_width;
  c.half_length_in = half_length;
  c.thickness_in = 0.09;
  return c;
}

struct SolvedSpecimen {
  SpecimenGeometry geom;
  std::shared_ptr<TriMesh> mesh;
  UnitStressField field;
};

SolvedSpecimen solve_specimen(const GeometryConfig& config, double h, int levels) {
  SolvedSpecimen s;
  s.geom = build_geometry(config);
  TriMesh mesh = triangulate(s.geom, h);
  for (int i = 0; i < levels; ++i) mesh = refine(mesh);
  s.mesh = std::make_shared<TriMesh>(std::move(mesh));
  MaterialParams mat;
  s.field = recover_stress(*s.mesh, assemble_solve(*s.mesh, mat), mat);
  return s;
}

int notch_root_node(const TriMesh& mesh, const SpecimenGeometry& geom) {
  int best = 0;
  double best_dist = 1e30;
  for (int i = 0; i < mesh.node_count(); ++i) {
    double dx = mesh.nodes[i].x;
    double dy = mesh.nodes[i].y - 0.5 * geom.w_min_in;
    double dist = dx * dx + dy * dy;
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("stress_field") {

TEST_CASE("effective stress of canonical states") {
  CHECK(effective_stress(3.5, 0.0, 0.0) == doctest::Approx(3.5));
  CHECK(effective_stress(0.0, 0.0, 2.0) == doctest::Approx(2.0));
  CHECK(effective_stress(0.0, 0.0, -2.0) == doctest::Approx(2.0));
  CHECK(effective_stress(1.25, 1.25, 0.0) == doctest::Approx(1.25));
}

TEST_CASE("surface quadrature weights sum to the surface measure") {
  // Unit-square quarter domain.
  GeometryConfig square = strip_config(2.0, 1.001);
  SpecimenGeometry geom = build_geometry(square);
  geom.half_length_in = 1.0;
  TriMesh mesh = refine(triangulate(geom, 0.5));
  SurfaceQuadrature quad = build_surface_quadrature(mesh, 0.09);
  CHECK(quad.total() == doctest::Approx(2.36).epsilon(1e-12));
  CHECK(quad.total() == doctest::Approx(surface_measure(mesh, 0.09)).epsilon(1e-12));

  for (int id : {1, 2, 3}) {
    SpecimenGeometry spec = build_geometry(specimen_defaults(id));
    TriMesh spec_mesh = triangulate(spec, default_edge_length(spec));
    SurfaceQuadrature sq = build_surface_quadrature(spec_mesh, spec.thickness_in);
    CHECK(sq.total() ==
          doctest::Approx(surface_measure(spec_mesh, spec.thickness_in)).epsilon(1e-12));
    for (int k = 0; k < sq.site_count(); ++k) CHECK(sq.weight(k) >= 0.0);
  }
}

TEST_CASE("vertex rule and boundary trapezoids integrate linear fields exactly") {
  GeometryConfig square = strip_config(2.0, 1.001);
  SpecimenGeometry geom = build_geometry(square);
  geom.half_length_in = 1.0;
  TriMesh mesh = refine(refine(triangulate(geom, 0.5)));
  SurfaceQuadrature quad = build_surface_quadrature(mesh, 0.09);
  double face = 0.0, lateral = 0.0;
  for (int k = 0; k < quad.site_count(); ++k) {
    double f = mesh.nodes[k].x + mesh.nodes[k].y;
    face += quad.face[k] * f;
    lateral += quad.lateral[k] * f;
  }
  // 2 * integral of (x+y) over the unit square = 2; thickness-weighted
  // trapezoids of (x+y) along the perimeter = 0.09 * 4.
  CHECK(face == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lateral == doctest::Approx(0.09 * 4.0).epsilon(1e-12));
}

TEST_CASE("face weights of any mesh sum to twice the area") {
  TriMesh mesh = triangulate(build_geometry(specimen_defaults(2)), 0.76);
  SurfaceQuadrature quad = build_surface_quadrature(mesh, 0.09);
  double face = 0.0;
  for (double w : quad.face) face += w;
  CHECK(face == doctest::Approx(2.0 * mesh.total_area()).epsilon(1e-12));
}

TEST_CASE("uniform strip: averaging any square returns the constant") {
  SolvedSpecimen s = solve_specimen(strip_config(), 0.25, 1);
  StressInterpolant interp(s.mesh, s.field);
  for (double delta : {0.0, 0.05, 0.2, 0.4}) {
    double v = interp.averaged_at({0.3, 0.2}, delta);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Boundary site: part of the square is clipped away.
  CHECK(interp.averaged_at({0.0, 0.5}, 0.2) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("delta = 0 at a node returns the nodal effective stress exactly") {
  SolvedSpecimen s = solve_specimen(specimen_defaults(2), 0.76, 1);
  StressInterpolant interp(s.mesh, s.field);
  for (int k : {0, 5, 17}) {
    double v = interp.averaged_at(s.mesh->nodes[k], 0.0);
    CHECK(v == doctest::Approx(interp.node_values()[k]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(interp.effective_at({-1.0, -1.0}), std::domain_error);
}

TEST_CASE("notch-root averaging lies below the peak and matches a finer subgrid") {
  SolvedSpecimen s = solve_specimen(specimen_defaults(2), 0.76, 3);
  StressInterpolant interp(s.mesh, s.field);
  int root = notch_root_node(*s.mesh, s.geom);
  Vec2 x = s.mesh->nodes[root];
  double pointwise = interp.averaged_at(x, 0.0);
  double averaged = interp.averaged_at(x, 0.025);
  CHECK(averaged < pointwise);
  double oracle = interp.averaged_at(x, 0.025, 32);
  CHECK(std::abs(averaged - oracle) / oracle <= 0.005);
}

TEST_CASE("averaging commutes with scalar field scaling") {
  SolvedSpecimen s = solve_specimen(specimen_defaults(2), 0.76, 2);
  StressInterpolant unit(s.mesh, s.field);
  UnitStressField scaled = scale_stress(s.field, 3.0, 0.0, 0.6, s.geom);
  StressInterpolant triple(s.mesh, scaled);
  int root = notch_root_node(*s.mesh, s.geom);
  Vec2 x = s.mesh->nodes[root];
  double c = traction_scale(3.0, 0.0, 0.6, s.geom.width_ratio());
  for (double delta : {0.0, 0.0125, 0.05}) {
    CHECK(triple.averaged_at(x, delta) ==
          doctest::Approx(c * unit.averaged_at(x, delta)).epsilon(1e-12));
  }
}

TEST_CASE("averaged values approach the pointwise value as delta shrinks") {
  SolvedSpecimen s = solve_specimen(specimen_defaults(2), 0.76, 3);
  StressInterpolant interp(s.mesh, s.field);
  int root = notch_root_node(*s.mesh, s.geom);
  Vec2 x = s.mesh->nodes[root];
  double pointwise = interp.averaged_at(x, 0.0);
  double previous_gap = 1e30;
  for (double delta : {0.05, 0.025, 0.0125, 0.00625}) {
    double gap = std::abs(interp.averaged_at(x, delta) - pointwise);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("averaged profile covers all nodes and respects delta = 0") {
  SolvedSpecimen s = solve_specimen(specimen_defaults(2), 0.76, 1);
  StressInterpolant interp(s.mesh, s.field);
  AveragedStressProfile p0 = build_averaged_profile(interp, 0.0);
  CHECK(p0.values == interp.node_values());
  AveragedStressProfile p1 = build_averaged_profile(interp, 0.0125);
  CHECK(static_cast<int>(p1.values.size()) == s.mesh->node_count());
  for (double v : p1.values) CHECK(std::isfinite(v));
}

TEST_CASE("highly stressed volume") {
  SolvedSpecimen strip = solve_specimen(strip_config(), 0.25, 1);
  StressInterpolant interp(strip.mesh, strip.field);
  SurfaceQuadrature quad = build_surface_quadrature(*strip.mesh, 0.09);

  SUBCASE("uniform strip: below-threshold beta captures everything") {
    double gamma = highly_stressed_volume(interp.node_values(), quad, 0.5);
    CHECK(gamma == doctest::Approx(quad.total()).epsilon(1e-12));
  }
  SUBCASE("uniform strip: beta above the field is an error") {
    CHECK_THROWS_WITH_AS(highly_stressed_volume(interp.node_values(), quad, 1.5),
                         doctest::Contains("empty highly stressed volume"),
                         std::domain_error);
    CHECK(highly_stressed_volume_or_zero(interp.node_values(), quad, 1.5) == 0.0);
  }
  SUBCASE("gamma is non-increasing in beta; gamma(0) is the full measure") {
    SolvedSpecimen s = solve_specimen(specimen_defaults(2), 0.76, 2);
    StressInterpolant si(s.mesh, s.field);
    SurfaceQuadrature sq = build_surface_quadrature(*s.mesh, s.geom.thickness_in);
    CHECK(highly_stressed_volume(si.node_values(), sq, 0.0) ==
          doctest::Approx(sq.total()).epsilon(1e-12));
    double g116 = highly_stressed_volume(si.node_values(), sq, 1.16);
    double g195 = highly_stressed_volume(si.node_values(), sq, 1.95);
    CHECK(g195 > 0.0);
    CHECK(g195 < g116);
    double previous = 1e30;
    for (double beta = 0.0; beta < 2.4; beta += 0.2) {
      double gamma = highly_stressed_volume_or_zero(si.node_values(), sq, beta);
      CHECK(gamma <= previous);
      previous = gamma;
    }
  }
}

TEST_CASE("specimen-1 boundary integral of the unit stress converges") {
  SpecimenGeometry geom = build_geometry(specimen_defaults(1));
  MaterialParams mat;
  TriMesh mesh = triangulate(geom, 1.2);
  std::vector<double> values;
  for (int level = 0; level <= 4; ++level) {
    if (level > 0) mesh = refine(mesh);
    UnitStressField field = recover_stress(mesh, assemble_solve(mesh, mat), mat);
    auto mesh_ptr = std::make_shared<TriMesh>(mesh);
    StressInterpolant interp(mesh_ptr, field);
    SurfaceQuadrature quad = build_surface_quadrature(mesh, geom.thickness_in);
    double integral = 0.0;
    for (int k = 0; k < quad.site_count(); ++k)
      integral += quad.weight(k) * interp.node_values()[k];
    values.push_back(integral);
  }
  double last_change = std::abs(values[4] - values[3]) / std::abs(values[4]);
  CHECK(last_change < 0.01);
}

}  // TEST_SUITE
