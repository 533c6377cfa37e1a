#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fatigue {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class SpecimenKind { UnnotchedDogbone, EdgeNotched };

/// Raw geometry inputs, typically parsed from a JSON config file.
/// Lengths are in inches.
struct GeometryConfig {
  SpecimenKind kind = SpecimenKind::EdgeNotched;
  double w_max_in = 0.0;        ///< full maximum width of the specimen
  double w_min_in = 0.0;        ///< full width at the net section
  double notch_radius_in = 0.0; ///< notch root radius (fillet radius for dogbones)
  double half_length_in = 0.0;  ///< half of the modeled specimen length
  double thickness_in = 0.0;    ///< sheet thickness
};

/// A validated specimen geometry. The modeled domain is the upper-right
/// quarter of the specimen: x in [0, half_length], y in [0, w_max/2], with
/// the reduced section centered at x = 0.
struct SpecimenGeometry {
  SpecimenKind kind = SpecimenKind::EdgeNotched;
  double w_max_in = 0.0;
  double w_min_in = 0.0;
  double notch_radius_in = 0.0;
  double half_length_in = 0.0;
  double thickness_in = 0.0;

  double width_ratio() const { return w_min_in / w_max_in; }
  double notch_depth() const { return 0.5 * (w_max_in - w_min_in); }
  bool has_arc() const { return notch_depth() > 0.0; }

  /// y-coordinate of the arc center (the arc center sits on x = 0).
  double arc_center_y() const { return 0.5 * w_min_in + notch_radius_in; }
  /// x where the boundary arc ends (joins the straight edge or the flank).
  double arc_end_x() const;
  /// True when the notch is deeper than its radius, so a straight flank
  /// connects the root arc to the outer edge.
  bool has_flank() const { return notch_depth() > notch_radius_in; }
  /// Boundary half-width profile y = Y(x) along the arc, 0 <= x <= arc_end_x().
  double arc_profile(double x) const;
};

/// Validates a geometry config. Throws ValidationError naming the violated
/// constraint. w_min == w_max is accepted as the degenerate rectangle strip.
SpecimenGeometry build_geometry(const GeometryConfig& config);

/// Approximate defaults for the three data-set specimens (1 = unnotched
/// dogbone, 2 = blunt edge notch, 3 = sharp edge notch). Radius and
/// thickness are as published; the remaining dimensions are approximations.
GeometryConfig specimen_defaults(int data_set);

enum class BoundaryTag : std::uint8_t { B1, B2, B3, B4, B5 };

const char* to_string(BoundaryTag tag);

struct BoundaryEdge {
  std::int32_t a = 0;
  std::int32_t b = 0;
  BoundaryTag tag = BoundaryTag::B1;
};

/// Circular boundary piece; nodes created on it during refinement are
/// projected back onto the circle.
struct ArcSpec {
  Vec2 center;
  double radius = 0.0;
};

/// Conforming triangulation of a quarter domain with tagged boundary
/// segments: B1 = loaded end (x = half_length), B2 = straight free edge,
/// B3 = notch arc / hole arc (plus flank if any), B4 = symmetry axis y = 0,
/// B5 = symmetry axis x = 0.
struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<std::int32_t, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  int refinement_level = 0;
  std::optional<ArcSpec> arc;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  double total_area() const;
  double boundary_length() const;
  double boundary_length(BoundaryTag tag) const;
  double edge_length(const BoundaryEdge& e) const;
};

/// Deterministic graded structured triangulation of the quarter domain.
/// Element size near the notch arc is <= h/4, growing geometrically to h
/// away from it. Throws ValidationError when h exceeds the notch radius of
/// a notched geometry.
TriMesh triangulate(const SpecimenGeometry& geom, double h);

/// Default target edge length used by the CLI for a given geometry.
double default_edge_length(const SpecimenGeometry& geom);

/// Uniform 1->4 refinement by edge midpoints. Boundary tags are inherited;
/// midpoints of arc edges are projected back onto the arc.
TriMesh refine(const TriMesh& mesh);

/// Surface measure of the 3D specimen boundary represented by the 2D mesh:
/// thickness * (boundary polyline length) + 2 * (triangulated area).
double surface_measure(const TriMesh& mesh, double thickness_in);

/// Quarter of a rectangular plate with a circular hole centered at the
/// origin; used for stress-concentration verification. Tags follow the
/// specimen convention (B3 = hole arc).
TriMesh triangulate_hole_plate(double hole_radius, double width, double height, double h);

/// Checks all mesh invariants (positive areas, tagged boundary coverage,
/// closed chains). Throws ValidationError on the first violation.
void check_mesh(const TriMesh& mesh);

/// Debug export: nodes (x,y), triangles (n0,n1,n2), edges (a,b,tag).
void write_mesh_csv(const TriMesh& mesh, const std::string& nodes_path,
                    const std::string& triangles_path, const std::string& edges_path);

}  // namespace fatigue
