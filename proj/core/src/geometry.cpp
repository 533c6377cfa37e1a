#include "fatigue/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>

#include "fatigue/errors.hpp"

namespace fatigue {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

// Breakpoints 0 = b0 < ... < bn = extent with the first step ~= fine and
// subsequent steps doubling up to coarse. The last step absorbs the
// remainder (at most 1.45x the running step).
std::vector<double> graded_breaks(double extent, double fine, double coarse) {
  std::vector<double> breaks{0.0};
  double step = std::min(fine, extent);
  double pos = 0.0;
  while (true) {
    double remaining = extent - pos;
    if (remaining <= step * 1.45) {
      breaks.push_back(extent);
      break;
    }
    pos += step;
    breaks.push_back(pos);
    step = std::min(coarse, step * 2.0);
  }
  return breaks;
}

std::vector<double> uniform_breaks(double extent, double target) {
  int n = std::max(1, static_cast<int>(std::ceil(extent / target - 1e-12)));
  std::vector<double> breaks(n + 1);
  for (int i = 0; i <= n; ++i) breaks[i] = extent * i / n;
  return breaks;
}

// Column-structured mesh builder. Columns are strictly ordered in x (or in
// the angular parameter for the hole plate); each pair of consecutive
// columns is stitched with trapezoid quads split into two triangles.
struct ColumnMesh {
  TriMesh mesh;

  int add_node(double x, double y) {
    mesh.nodes.push_back({x, y});
    return static_cast<int>(mesh.nodes.size()) - 1;
  }

  // Stitches two node index lists of equal length. Quads are split along
  // the (left_j, right_{j+1}) diagonal.
  void stitch(const std::vector<int>& left, const std::vector<int>& right) {
    for (std::size_t j = 0; j + 1 < left.size(); ++j) {
      auto a = static_cast<std::int32_t>(left[j]);
      auto b = static_cast<std::int32_t>(right[j]);
      auto c = static_cast<std::int32_t>(right[j + 1]);
      auto d = static_cast<std::int32_t>(left[j + 1]);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }

  void tag_run(const std::vector<int>& chain, BoundaryTag tag) {
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
      mesh.boundary_edges.push_back({static_cast<std::int32_t>(chain[j]),
                                     static_cast<std::int32_t>(chain[j + 1]), tag});
    }
  }
};

}  // namespace

double SpecimenGeometry::arc_end_x() const {
  double d = notch_depth();
  if (d <= 0.0) return 0.0;
  double r = notch_radius_in;
  if (d >= r) return r;  // quarter arc, flank above
  return std::sqrt(r * r - (r - d) * (r - d));
}

double SpecimenGeometry::arc_profile(double x) const {
  double r = notch_radius_in;
  double clamped = std::min(std::abs(x), r);
  return arc_center_y() - std::sqrt(r * r - clamped * clamped);
}

SpecimenGeometry build_geometry(const GeometryConfig& config) {
  require(config.w_max_in > 0.0, "w_max_in must be positive");
  require(config.w_min_in > 0.0, "w_min_in must be positive");
  require(config.notch_radius_in > 0.0, "notch_radius_in must be positive");
  require(config.half_length_in > 0.0, "half_length_in must be positive");
  require(config.thickness_in > 0.0, "thickness_in must be positive");
  require(config.w_min_in <= config.w_max_in, "w_min_in must not exceed w_max_in");
  require(config.half_length_in > 0.5 * config.w_max_in,
          "half_length_in must exceed w_max_in / 2");

  SpecimenGeometry geom;
  geom.kind = config.kind;
  geom.w_max_in = config.w_max_in;
  geom.w_min_in = config.w_min_in;
  geom.notch_radius_in = config.notch_radius_in;
  geom.half_length_in = config.half_length_in;
  geom.thickness_in = config.thickness_in;

  if (geom.kind == SpecimenKind::UnnotchedDogbone) {
    require(geom.notch_radius_in >= geom.notch_depth(),
            "dogbone fillet radius must be >= taper depth (w_max - w_min)/2");
  }
  require(geom.arc_end_x() < geom.half_length_in,
          "reduced-section arc must end before half_length_in");
  return geom;
}

GeometryConfig specimen_defaults(int data_set) {
  GeometryConfig c;
  c.thickness_in = 0.09;
  switch (data_set) {
    case 1:  // unnotched dogbone, 12 in fillet radius
      c.kind = SpecimenKind::UnnotchedDogbone;
      c.w_max_in = 1.5;
      c.w_min_in = 1.0;
      c.notch_radius_in = 12.0;
      c.half_length_in = 4.0;
      break;
    case 2:  // blunt edge notch, 0.76 in radius
      c.kind = SpecimenKind::EdgeNotched;
      c.w_max_in = 2.25;
      c.w_min_in = 1.5;
      c.notch_radius_in = 0.76;
      c.half_length_in = 4.0;
      break;
    case 3:  // sharp edge notch, 1/32 in radius (semicircular)
      c.kind = SpecimenKind::EdgeNotched;
      c.w_max_in = 0.5625;
      c.w_min_in = 0.5;
      c.notch_radius_in = 0.03125;
      c.half_length_in = 1.5;
      break;
    default:
      throw ValidationError("specimen_defaults: data_set must be 1, 2, or 3");
  }
  return c;
}

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::B1: return "B1";
    case BoundaryTag::B2: return "B2";
    case BoundaryTag::B3: return "B3";
    case BoundaryTag::B4: return "B4";
    case BoundaryTag::B5: return "B5";
  }
  return "?";
}

double TriMesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Vec2& a = nodes[tri[0]];
  const Vec2& b = nodes[tri[1]];
  const Vec2& c = nodes[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < triangle_count(); ++t) sum += signed_area(t);
  return sum;
}

double TriMesh::edge_length(const BoundaryEdge& e) const {
  double dx = nodes[e.b].x - nodes[e.a].x;
  double dy = nodes[e.b].y - nodes[e.a].y;
  return std::hypot(dx, dy);
}

double TriMesh::boundary_length() const {
  double sum = 0.0;
  for (const auto& e : boundary_edges) sum += edge_length(e);
  return sum;
}

double TriMesh::boundary_length(BoundaryTag tag) const {
  double sum = 0.0;
  for (const auto& e : boundary_edges)
    if (e.tag == tag) sum += edge_length(e);
  return sum;
}

double default_edge_length(const SpecimenGeometry& geom) {
  double h = 0.8 * geom.w_max_in;
  if (geom.has_arc()) h = std::min(h, geom.notch_radius_in);
  return h;
}

TriMesh triangulate(const SpecimenGeometry& geom, double h) {
  require(h > 0.0, "mesh size h must be positive");
  if (geom.has_arc()) {
    require(h <= geom.notch_radius_in,
            "mesh size h exceeds the notch radius; the notch cannot be resolved");
  }

  const double half_width = 0.5 * geom.w_max_in;
  const double length = geom.half_length_in;
  const double x_arc = geom.has_arc() ? geom.arc_end_x() : 0.0;
  const double fine = 0.25 * h;

  ColumnMesh builder;
  std::vector<int> b5_chain, b4_chain, b1_chain, b2_chain, b3_chain;

  // Relative y grid for the arc block: graded from h at y=0 to h/4 at the
  // arc, expressed as fractions of the column height.
  std::vector<double> eta{0.0, 1.0};
  if (geom.has_arc()) {
    double column_height = 0.5 * geom.w_min_in;
    std::vector<double> from_top = graded_breaks(column_height, fine, h);
    eta.assign(from_top.size(), 0.0);
    for (std::size_t i = 0; i < from_top.size(); ++i)
      eta[i] = (column_height - from_top[from_top.size() - 1 - i]) / column_height;
    eta.front() = 0.0;
    eta.back() = 1.0;
  }

  std::vector<int> prev_column;
  std::vector<double> left_edge_y;  // y grid of the interface column

  if (geom.has_arc()) {
    // Columns uniform in arc angle, so chord lengths stay <= h/4 even where
    // the arc approaches a vertical tangent.
    const double radius = geom.notch_radius_in;
    double phi_end = std::asin(std::min(1.0, x_arc / radius));
    int n_arc = std::max(1, static_cast<int>(std::ceil(radius * phi_end / fine - 1e-12)));
    std::vector<double> xs(n_arc + 1);
    for (int i = 0; i <= n_arc; ++i)
      xs[i] = radius * std::sin(phi_end * i / n_arc);
    xs.back() = x_arc;
    double flank_top = geom.arc_profile(x_arc);  // w_max/2 unless there is a flank
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double x = xs[i];
      double height = geom.arc_profile(x);
      std::vector<int> column;
      column.reserve(eta.size());
      for (double frac : eta) column.push_back(builder.add_node(x, frac * height));
      if (i == 0) {
        b5_chain.assign(column.rbegin(), column.rend());  // top -> bottom on x=0
      } else {
        builder.stitch(prev_column, column);
      }
      b4_chain.push_back(column.front());
      b3_chain.push_back(column.back());
      prev_column = std::move(column);
    }
    left_edge_y.clear();
    for (double frac : eta) left_edge_y.push_back(frac * flank_top);
    if (geom.has_flank()) {
      // Straight flank from the arc end up to the outer edge, fine at the arc.
      std::vector<double> fl = graded_breaks(half_width - flank_top, fine, h);
      for (std::size_t i = 1; i < fl.size(); ++i) {
        int id = builder.add_node(x_arc, flank_top + fl[i]);
        prev_column.push_back(id);
        b3_chain.push_back(id);
        left_edge_y.push_back(flank_top + fl[i]);
      }
    }
  }

  // Far block: from the arc end (or x=0 for a rectangle) to the loaded end.
  std::vector<double> xs = geom.has_arc() ? graded_breaks(length - x_arc, fine, h)
                                          : uniform_breaks(length, h);
  if (!geom.has_arc()) {
    std::vector<double> ys = uniform_breaks(half_width, h);
    left_edge_y = ys;
  }
  const std::size_t ny = left_edge_y.size();
  std::vector<double> right_edge_y(ny);
  for (std::size_t j = 0; j < ny; ++j)
    right_edge_y[j] = half_width * static_cast<double>(j) / static_cast<double>(ny - 1);

  for (std::size_t i = (geom.has_arc() ? 1 : 0); i < xs.size(); ++i) {
    double x = x_arc + xs[i];
    double t = xs[i] / xs.back();
    std::vector<int> column;
    column.reserve(ny);
    for (std::size_t j = 0; j < ny; ++j) {
      double y = (1.0 - t) * left_edge_y[j] + t * right_edge_y[j];
      column.push_back(builder.add_node(x, y));
    }
    if (prev_column.empty()) {
      b5_chain.assign(column.rbegin(), column.rend());
    } else {
      builder.stitch(prev_column, column);
    }
    b4_chain.push_back(column.front());
    b2_chain.push_back(column.back());
    prev_column = std::move(column);
  }
  if (geom.has_arc()) b2_chain.insert(b2_chain.begin(), b3_chain.back());
  b1_chain = prev_column;  // bottom -> top on x = length

  // Single closed loop: B4 (y=0, left to right), B1 (up), B2 (right to
  // left along the outer edge), B3 (arc/flank back to x=0), B5 (down).
  builder.tag_run(b4_chain, BoundaryTag::B4);
  builder.tag_run(b1_chain, BoundaryTag::B1);
  std::reverse(b2_chain.begin(), b2_chain.end());
  builder.tag_run(b2_chain, BoundaryTag::B2);
  std::reverse(b3_chain.begin(), b3_chain.end());
  builder.tag_run(b3_chain, BoundaryTag::B3);
  builder.tag_run(b5_chain, BoundaryTag::B5);

  TriMesh mesh = std::move(builder.mesh);
  mesh.refinement_level = 0;
  if (geom.has_arc())
    mesh.arc = ArcSpec{{0.0, geom.arc_center_y()}, geom.notch_radius_in};
  check_mesh(mesh);
  return mesh;
}

TriMesh triangulate_hole_plate(double hole_radius, double width, double height, double h) {
  require(hole_radius > 0.0 && width > hole_radius && height > hole_radius,
          "hole plate dimensions must satisfy 0 < radius < width, height");
  require(h > 0.0, "mesh size h must be positive");

  const double pi = 3.14159265358979323846;
  const double theta_corner = std::atan2(height, width);
  const double dtheta = 0.25 * h / hole_radius;

  // Angular grid including the diagonal corner direction.
  std::vector<double> thetas;
  {
    std::vector<double> part1 = uniform_breaks(theta_corner, dtheta);
    std::vector<double> part2 = uniform_breaks(0.5 * pi - theta_corner, dtheta);
    thetas = part1;
    for (std::size_t i = 1; i < part2.size(); ++i)
      thetas.push_back(theta_corner + part2[i]);
  }

  // Relative radial grid, fine at the hole.
  std::vector<double> rel = graded_breaks(std::min(width, height) - hole_radius, 0.25 * h, h);
  for (double& v : rel) v /= rel.back();

  ColumnMesh builder;
  std::vector<int> b4_chain, b5_chain, b3_chain, outer_chain;
  std::vector<int> prev_column;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    double theta = thetas[i];
    double c = std::cos(theta);
    double s = std::sin(theta);
    double outer = (theta <= theta_corner + 1e-14) ? width / std::max(c, 1e-300)
                                                   : height / std::max(s, 1e-300);
    std::vector<int> column;
    column.reserve(rel.size());
    for (double f : rel) {
      double r = hole_radius + f * (outer - hole_radius);
      column.push_back(builder.add_node(r * c, r * s));
    }
    // Exact coordinates on the straight edges.
    if (i == 0)
      for (int id : column) builder.mesh.nodes[id].y = 0.0;
    if (i + 1 == thetas.size())
      for (int id : column) builder.mesh.nodes[id].x = 0.0;

    // Columns advance counterclockwise, so the newer column is the "left" one.
    if (!prev_column.empty()) builder.stitch(column, prev_column);
    if (i == 0) b4_chain = column;
    if (i + 1 == thetas.size()) b5_chain.assign(column.rbegin(), column.rend());
    b3_chain.push_back(column.front());
    outer_chain.push_back(column.back());
    prev_column = std::move(column);
  }

  builder.tag_run(b4_chain, BoundaryTag::B4);
  // Outer boundary splits at the corner: right edge is loaded (B1), top is free (B2).
  std::size_t corner = 0;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    if (std::abs(thetas[i] - theta_corner) < 1e-14) corner = i;
  std::vector<int> b1_chain(outer_chain.begin(), outer_chain.begin() + corner + 1);
  std::vector<int> b2_chain(outer_chain.begin() + corner, outer_chain.end());
  builder.tag_run(b1_chain, BoundaryTag::B1);
  builder.tag_run(b2_chain, BoundaryTag::B2);
  builder.tag_run(b5_chain, BoundaryTag::B5);
  std::reverse(b3_chain.begin(), b3_chain.end());
  builder.tag_run(b3_chain, BoundaryTag::B3);

  TriMesh mesh = std::move(builder.mesh);
  mesh.refinement_level = 0;
  mesh.arc = ArcSpec{{0.0, 0.0}, hole_radius};
  check_mesh(mesh);
  return mesh;
}

namespace {

bool on_arc(const ArcSpec& arc, const Vec2& p) {
  double r = std::hypot(p.x - arc.center.x, p.y - arc.center.y);
  return std::abs(r - arc.radius) <= 1e-9 * arc.radius;
}

}  // namespace

TriMesh refine(const TriMesh& mesh) {
  TriMesh out;
  out.nodes = mesh.nodes;
  out.refinement_level = mesh.refinement_level + 1;
  out.arc = mesh.arc;

  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> midpoint;
  auto mid_of = [&](std::int32_t a, std::int32_t b) {
    auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 m{0.5 * (mesh.nodes[a].x + mesh.nodes[b].x),
           0.5 * (mesh.nodes[a].y + mesh.nodes[b].y)};
    if (mesh.arc && on_arc(*mesh.arc, mesh.nodes[a]) && on_arc(*mesh.arc, mesh.nodes[b])) {
      const ArcSpec& arc = *mesh.arc;
      double len = std::hypot(m.x - arc.center.x, m.y - arc.center.y);
      if (len > 0.0) {
        m.x = arc.center.x + (m.x - arc.center.x) * arc.radius / len;
        m.y = arc.center.y + (m.y - arc.center.y) * arc.radius / len;
      }
    }
    out.nodes.push_back(m);
    auto id = static_cast<std::int32_t>(out.nodes.size()) - 1;
    midpoint.emplace(key, id);
    return id;
  };

  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& tri : mesh.triangles) {
    std::int32_t a = tri[0], b = tri[1], c = tri[2];
    std::int32_t ab = mid_of(a, b), bc = mid_of(b, c), ca = mid_of(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }

  out.boundary_edges.reserve(mesh.boundary_edges.size() * 2);
  for (const auto& e : mesh.boundary_edges) {
    std::int32_t m = mid_of(e.a, e.b);
    out.boundary_edges.push_back({e.a, m, e.tag});
    out.boundary_edges.push_back({m, e.b, e.tag});
  }
  return out;
}

double surface_measure(const TriMesh& mesh, double thickness_in) {
  return thickness_in * mesh.boundary_length() + 2.0 * mesh.total_area();
}

void check_mesh(const TriMesh& mesh) {
  require(!mesh.nodes.empty() && !mesh.triangles.empty(), "mesh is empty");
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    require(mesh.signed_area(t) > 0.0, "triangle " + std::to_string(t) +
                                           " has non-positive signed area");
    for (auto v : mesh.triangles[t])
      require(v >= 0 && v < mesh.node_count(), "triangle vertex index out of range");
  }

  // The tagged edges must be exactly the triangulation boundary, once each.
  std::map<std::pair<std::int32_t, std::int32_t>, int> edge_use;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(tri[k], tri[(k + 1) % 3]);
      edge_use[key] += 1;
    }
  }
  std::map<std::pair<std::int32_t, std::int32_t>, int> tagged;
  for (const auto& e : mesh.boundary_edges) {
    auto key = std::minmax(e.a, e.b);
    tagged[key] += 1;
    require(tagged[key] == 1, "boundary edge tagged more than once");
    auto it = edge_use.find(key);
    require(it != edge_use.end() && it->second == 1,
            "tagged edge is not a boundary edge of the triangulation");
  }
  std::map<std::int32_t, int> incident;
  for (const auto& [key, count] : edge_use) {
    if (count == 1) {
      require(tagged.count(key) == 1, "untagged boundary edge in the triangulation");
      incident[key.first] += 1;
      incident[key.second] += 1;
    }
  }
  for (const auto& [node, count] : incident)
    require(count == 2, "boundary node " + std::to_string(node) +
                            " does not lie on a closed chain");
}

void write_mesh_csv(const TriMesh& mesh, const std::string& nodes_path,
                    const std::string& triangles_path, const std::string& edges_path) {
  char buf[128];
  {
    std::ofstream f(nodes_path);
    require(f.good(), "cannot open " + nodes_path);
    f << "x_in,y_in\n";
    for (const auto& p : mesh.nodes) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", p.x, p.y);
      f << buf;
    }
  }
  {
    std::ofstream f(triangles_path);
    require(f.good(), "cannot open " + triangles_path);
    f << "n0,n1,n2\n";
    for (const auto& t : mesh.triangles) f << t[0] << ',' << t[1] << ',' << t[2] << '\n';
  }
  {
    std::ofstream f(edges_path);
    require(f.good(), "cannot open " + edges_path);
    f << "a,b,tag\n";
    for (const auto& e : mesh.boundary_edges)
      f << e.a << ',' << e.b << ',' << to_string(e.tag) << '\n';
  }
}

}  // namespace fatigue
