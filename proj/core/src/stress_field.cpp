#include "fatigue/stress_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fatigue/errors.hpp"

namespace fatigue {

double effective_stress(double sx, double sy, double txy) {
  double half_diff = 0.5 * (sx - sy);
  return 0.5 * (sx + sy) + std::sqrt(half_diff * half_diff + txy * txy);
}

double SurfaceQuadrature::total() const {
  double sum = 0.0;
  for (int k = 0; k < site_count(); ++k) sum += weight(k);
  return sum;
}

SurfaceQuadrature build_surface_quadrature(const TriMesh& mesh, double thickness_in) {
  SurfaceQuadrature quad;
  quad.lateral.assign(mesh.node_count(), 0.0);
  quad.face.assign(mesh.node_count(), 0.0);
  for (const auto& e : mesh.boundary_edges) {
    double half = 0.5 * mesh.edge_length(e) * thickness_in;
    quad.lateral[e.a] += half;
    quad.lateral[e.b] += half;
  }
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double third = mesh.signed_area(t) / 3.0;
    for (auto v : mesh.triangles[t]) quad.face[v] += 2.0 * third;
  }
  return quad;
}

namespace {

struct Bary {
  double l0, l1, l2;
  bool inside(double tol) const { return l0 >= -tol && l1 >= -tol && l2 >= -tol; }
};

Bary barycentric(const TriMesh& mesh, int t, Vec2 p) {
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.nodes[tri[0]];
  const Vec2& b = mesh.nodes[tri[1]];
  const Vec2& c = mesh.nodes[tri[2]];
  double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  Bary w;
  w.l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
  w.l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  w.l0 = 1.0 - w.l1 - w.l2;
  return w;
}

}  // namespace

TriLocator::TriLocator(const TriMesh& mesh) : mesh_(&mesh) {
  double x1 = mesh.nodes[0].x, y1 = mesh.nodes[0].y;
  double x2 = x1, y2 = y1;
  for (const auto& p : mesh.nodes) {
    x1 = std::min(x1, p.x);
    y1 = std::min(y1, p.y);
    x2 = std::max(x2, p.x);
    y2 = std::max(y2, p.y);
  }
  x0_ = x1;
  y0_ = y1;
  int target = std::max(1, static_cast<int>(std::sqrt(mesh.triangle_count())));
  cell_ = std::max((x2 - x1), (y2 - y1)) / target;
  if (!(cell_ > 0.0)) cell_ = 1.0;
  nx_ = static_cast<int>((x2 - x0_) / cell_) + 1;
  ny_ = static_cast<int>((y2 - y0_) / cell_) + 1;
  bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double tx1 = mesh.nodes[tri[0]].x, tx2 = tx1, ty1 = mesh.nodes[tri[0]].y, ty2 = ty1;
    for (int k = 1; k < 3; ++k) {
      tx1 = std::min(tx1, mesh.nodes[tri[k]].x);
      tx2 = std::max(tx2, mesh.nodes[tri[k]].x);
      ty1 = std::min(ty1, mesh.nodes[tri[k]].y);
      ty2 = std::max(ty2, mesh.nodes[tri[k]].y);
    }
    int i1 = std::clamp(static_cast<int>((tx1 - x0_) / cell_), 0, nx_ - 1);
    int i2 = std::clamp(static_cast<int>((tx2 - x0_) / cell_), 0, nx_ - 1);
    int j1 = std::clamp(static_cast<int>((ty1 - y0_) / cell_), 0, ny_ - 1);
    int j2 = std::clamp(static_cast<int>((ty2 - y0_) / cell_), 0, ny_ - 1);
    for (int i = i1; i <= i2; ++i)
      for (int j = j1; j <= j2; ++j)
        bins_[static_cast<std::size_t>(i) * ny_ + j].push_back(t);
  }
}

int TriLocator::find(Vec2 p) const {
  int i = static_cast<int>((p.x - x0_) / cell_);
  int j = static_cast<int>((p.y - y0_) / cell_);
  if (i < 0 || i >= nx_ || j < 0 || j >= ny_) return -1;
  const auto& candidates = bins_[static_cast<std::size_t>(i) * ny_ + j];
  for (auto t : candidates) {
    if (barycentric(*mesh_, t, p).inside(1e-10)) return t;
  }
  return -1;
}

StressInterpolant::StressInterpolant(std::shared_ptr<const TriMesh> mesh,
                                     const UnitStressField& field)
    : mesh_(std::move(mesh)), locator_(*mesh_) {
  node_values_.resize(mesh_->node_count());
  for (int i = 0; i < mesh_->node_count(); ++i)
    node_values_[i] = effective_stress(field.sx[i], field.sy[i], field.txy[i]);
}

double StressInterpolant::effective_at(Vec2 x) const {
  int t = locator_.find(x);
  if (t < 0) throw std::domain_error("point outside the specimen domain");
  Bary w = barycentric(*mesh_, t, x);
  const auto& tri = mesh_->triangles[t];
  return w.l0 * node_values_[tri[0]] + w.l1 * node_values_[tri[1]] +
         w.l2 * node_values_[tri[2]];
}

double StressInterpolant::averaged_at(Vec2 x, double delta, int subgrid) const {
  if (delta < 0.0) throw std::domain_error("averaging length delta must be >= 0");
  if (delta == 0.0) return effective_at(x);
  double sum = 0.0;
  int count = 0;
  double step = delta / subgrid;
  double origin_x = x.x - 0.5 * delta + 0.5 * step;
  double origin_y = x.y - 0.5 * delta + 0.5 * step;
  for (int i = 0; i < subgrid; ++i) {
    for (int j = 0; j < subgrid; ++j) {
      Vec2 p{origin_x + i * step, origin_y + j * step};
      int t = locator_.find(p);
      if (t < 0) continue;
      Bary w = barycentric(*mesh_, t, p);
      const auto& tri = mesh_->triangles[t];
      sum += w.l0 * node_values_[tri[0]] + w.l1 * node_values_[tri[1]] +
             w.l2 * node_values_[tri[2]];
      ++count;
    }
  }
  if (count == 0) {
    // The whole square fell outside; accept boundary sites whose center is
    // still in the domain closure.
    return effective_at(x);
  }
  return sum / count;
}

double averaged_effective_stress(const StressInterpolant& interp, double delta, Vec2 x) {
  return interp.averaged_at(x, delta);
}

AveragedStressProfile build_averaged_profile(const StressInterpolant& interp, double delta,
                                             int subgrid) {
  AveragedStressProfile profile;
  profile.delta = delta;
  profile.mesh = interp.mesh_ptr();
  if (delta == 0.0) {
    profile.values = interp.node_values();
    return profile;
  }
  const auto& mesh = interp.mesh();
  profile.values.resize(mesh.node_count());
  for (int k = 0; k < mesh.node_count(); ++k)
    profile.values[k] = interp.averaged_at(mesh.nodes[k], delta, subgrid);
  return profile;
}

double highly_stressed_volume_or_zero(const std::vector<double>& unit_eff,
                                      const SurfaceQuadrature& quad, double beta) {
  double gamma = 0.0;
  for (int k = 0; k < quad.site_count(); ++k)
    if (unit_eff[k] > beta) gamma += quad.weight(k);
  return gamma;
}

double highly_stressed_volume(const std::vector<double>& unit_eff,
                              const SurfaceQuadrature& quad, double beta) {
  if (!(beta >= 0.0)) throw std::domain_error("beta must be >= 0");
  double gamma = highly_stressed_volume_or_zero(unit_eff, quad, beta);
  if (gamma <= 0.0)
    throw std::domain_error("empty highly stressed volume: beta exceeds the maximum "
                            "unit effective stress");
  return gamma;
}

void write_profile_csv(const TriMesh& mesh, const SurfaceQuadrature& quad,
                       const std::vector<double>& unit_eff,
                       const std::vector<double>& averaged, const std::string& path) {
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << "x_in,y_in,weight_in2,eff_unit,eff_unit_avg\n";
  char buf[192];
  for (int k = 0; k < mesh.node_count(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", mesh.nodes[k].x,
                  mesh.nodes[k].y, quad.weight(k), unit_eff[k], averaged[k]);
    f << buf;
  }
}

}  // namespace fatigue
