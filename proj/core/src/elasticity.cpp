#include "fatigue/elasticity.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "fatigue/errors.hpp"

namespace fatigue {

namespace {

struct ElementGeometry {
  double area;
  // Shape-function gradients: grad[i] = (dphi_i/dx, dphi_i/dy).
  std::array<std::array<double, 2>, 3> grad;
};

ElementGeometry element_geometry(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.nodes[tri[0]];
  const Vec2& p1 = mesh.nodes[tri[1]];
  const Vec2& p2 = mesh.nodes[tri[2]];
  double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  ElementGeometry g;
  g.area = 0.5 * det;
  double b0 = p1.y - p2.y, b1 = p2.y - p0.y, b2 = p0.y - p1.y;
  double c0 = p2.x - p1.x, c1 = p0.x - p2.x, c2 = p1.x - p0.x;
  g.grad = {{{b0 / det, c0 / det}, {b1 / det, c1 / det}, {b2 / det, c2 / det}}};
  return g;
}

// Plane-stress constitutive matrix in Voigt order (sx, sy, txy).
Eigen::Matrix3d constitutive(const MaterialParams& mat) {
  double f = mat.e_ksi / (1.0 - mat.nu * mat.nu);
  Eigen::Matrix3d d;
  d << f, f * mat.nu, 0.0, f * mat.nu, f, 0.0, 0.0, 0.0, 0.5 * f * (1.0 - mat.nu);
  return d;
}

Eigen::Matrix<double, 6, 6> element_stiffness(const ElementGeometry& g,
                                              const Eigen::Matrix3d& d) {
  Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    b(0, 2 * i) = g.grad[i][0];
    b(1, 2 * i + 1) = g.grad[i][1];
    b(2, 2 * i) = g.grad[i][1];
    b(2, 2 * i + 1) = g.grad[i][0];
  }
  return g.area * b.transpose() * d * b;
}

}  // namespace

DisplacementField assemble_solve(const TriMesh& mesh, const MaterialParams& mat) {
  if (!(mat.e_ksi > 0.0)) throw ValidationError("modulus of elasticity must be positive");
  if (!(mat.nu >= 0.0 && mat.nu < 0.5))
    throw ValidationError("Poisson's ratio must lie in [0, 0.5)");

  const int n = mesh.node_count();
  std::vector<char> fix_x(n, 0), fix_y(n, 0);
  bool has_b1 = false, has_b4 = false, has_b5 = false;
  for (const auto& e : mesh.boundary_edges) {
    switch (e.tag) {
      case BoundaryTag::B1:
        has_b1 = true;
        break;
      case BoundaryTag::B4:
        fix_y[e.a] = fix_y[e.b] = 1;
        has_b4 = true;
        break;
      case BoundaryTag::B5:
        fix_x[e.a] = fix_x[e.b] = 1;
        has_b5 = true;
        break;
      default:
        break;
    }
  }
  if (!has_b5)
    throw ValidationError("singular system: x-translation unconstrained (no B5 edges)");
  if (!has_b4)
    throw ValidationError("singular system: y-translation unconstrained (no B4 edges)");
  if (!has_b1) throw ValidationError("no traction boundary B1 in mesh");

  // Reduced numbering over free dofs.
  std::vector<int> dof(2 * n, -1);
  int n_free = 0;
  for (int i = 0; i < n; ++i) {
    if (!fix_x[i]) dof[2 * i] = n_free++;
    if (!fix_y[i]) dof[2 * i + 1] = n_free++;
  }

  const Eigen::Matrix3d d = constitutive(mat);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 36);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    ElementGeometry g = element_geometry(mesh, t);
    Eigen::Matrix<double, 6, 6> ke = element_stiffness(g, d);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 6; ++i) {
      int gi = dof[2 * tri[i / 2] + i % 2];
      if (gi < 0) continue;
      for (int j = 0; j < 6; ++j) {
        int gj = dof[2 * tri[j / 2] + j % 2];
        if (gj < 0) continue;
        triplets.emplace_back(gi, gj, ke(i, j));
      }
    }
  }

  // Consistent load from the unit traction sigma_x = 1 on B1.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_free);
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::B1) continue;
    double half = 0.5 * mesh.edge_length(e);
    for (auto node : {e.a, e.b}) {
      int gi = dof[2 * node];
      if (gi >= 0) f[gi] += half;
    }
  }

  Eigen::SparseMatrix<double> k(n_free, n_free);
  k.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(k);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("stiffness factorization failed");
  Eigen::VectorXd u = solver.solve(f);
  u += solver.solve(f - k * u);  // one refinement pass

  double rel = (k * u - f).norm() / f.norm();
  if (!(rel <= 1e-10))
    throw std::runtime_error("linear solve residual " + std::to_string(rel) +
                             " exceeds 1e-10");

  DisplacementField out;
  out.ux.assign(n, 0.0);
  out.uy.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (dof[2 * i] >= 0) out.ux[i] = u[dof[2 * i]];
    if (dof[2 * i + 1] >= 0) out.uy[i] = u[dof[2 * i + 1]];
  }
  return out;
}

UnitStressField recover_stress(const TriMesh& mesh, const DisplacementField& u,
                               const MaterialParams& mat) {
  const int n = mesh.node_count();
  UnitStressField field;
  field.sx.assign(n, 0.0);
  field.sy.assign(n, 0.0);
  field.txy.assign(n, 0.0);
  std::vector<double> weight(n, 0.0);

  const Eigen::Matrix3d d = constitutive(mat);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    Eigen::Vector3d eps = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) {
      eps[0] += g.grad[i][0] * u.ux[tri[i]];
      eps[1] += g.grad[i][1] * u.uy[tri[i]];
      eps[2] += g.grad[i][1] * u.ux[tri[i]] + g.grad[i][0] * u.uy[tri[i]];
    }
    Eigen::Vector3d sig = d * eps;
    for (int i = 0; i < 3; ++i) {
      field.sx[tri[i]] += g.area * sig[0];
      field.sy[tri[i]] += g.area * sig[1];
      field.txy[tri[i]] += g.area * sig[2];
      weight[tri[i]] += g.area;
    }
  }
  for (int i = 0; i < n; ++i) {
    field.sx[i] /= weight[i];
    field.sy[i] /= weight[i];
    field.txy[i] /= weight[i];
    if (!std::isfinite(field.sx[i]) || !std::isfinite(field.sy[i]) ||
        !std::isfinite(field.txy[i]))
      throw std::runtime_error("non-finite recovered stress at node " + std::to_string(i));
  }
  return field;
}

double traction_scale(double s_max_ksi, double ratio_r, double q, double width_ratio) {
  if (!(s_max_ksi > 0.0)) throw std::domain_error("S_max must be positive");
  if (!(ratio_r < 1.0)) throw std::domain_error("cycle ratio R must be < 1");
  return width_ratio * s_max_ksi * std::pow(1.0 - ratio_r, q);
}

UnitStressField scale_stress(const UnitStressField& field, double s_max_ksi,
                             double ratio_r, double q, const SpecimenGeometry& geom) {
  double t = traction_scale(s_max_ksi, ratio_r, q, geom.width_ratio());
  UnitStressField out = field;
  for (double& v : out.sx) v *= t;
  for (double& v : out.sy) v *= t;
  for (double& v : out.txy) v *= t;
  return out;
}

std::vector<double> internal_forces(const TriMesh& mesh, const MaterialParams& mat,
                                    const DisplacementField& u) {
  std::vector<double> f(2 * mesh.node_count(), 0.0);
  const Eigen::Matrix3d d = constitutive(mat);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    ElementGeometry g = element_geometry(mesh, t);
    Eigen::Matrix<double, 6, 6> ke = element_stiffness(g, d);
    const auto& tri = mesh.triangles[t];
    Eigen::Matrix<double, 6, 1> ue;
    for (int i = 0; i < 3; ++i) {
      ue[2 * i] = u.ux[tri[i]];
      ue[2 * i + 1] = u.uy[tri[i]];
    }
    Eigen::Matrix<double, 6, 1> fe = ke * ue;
    for (int i = 0; i < 3; ++i) {
      f[2 * tri[i]] += fe[2 * i];
      f[2 * tri[i] + 1] += fe[2 * i + 1];
    }
  }
  return f;
}

double strain_energy(const TriMesh& mesh, const MaterialParams& mat,
                     const DisplacementField& u) {
  double energy = 0.0;
  const Eigen::Matrix3d d = constitutive(mat);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    Eigen::Vector3d eps = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) {
      eps[0] += g.grad[i][0] * u.ux[tri[i]];
      eps[1] += g.grad[i][1] * u.uy[tri[i]];
      eps[2] += g.grad[i][1] * u.ux[tri[i]] + g.grad[i][0] * u.uy[tri[i]];
    }
    energy += 0.5 * g.area * eps.dot(d * eps);
  }
  return energy;
}

void write_field_csv(const TriMesh& mesh, const UnitStressField& field,
                     const std::string& path) {
  std::ofstream f(path);
  if (!f.good()) throw ValidationError("cannot open " + path);
  f << "x_in,y_in,sx,sy,txy\n";
  char buf[192];
  for (int i = 0; i < mesh.node_count(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", mesh.nodes[i].x,
                  mesh.nodes[i].y, field.sx[i], field.sy[i], field.txy[i]);
    f << buf;
  }
}

}  // namespace fatigue
