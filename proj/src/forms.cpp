#include "cutfem/forms.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "cutfem/quadrature.hpp"

namespace cutfem {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void scatter(Triplets& out, const MatrixXd& local, const std::vector<int>& rows, int row_offset,
             const std::vector<int>& cols, int col_offset, double scale = 1.0) {
  for (Eigen::Index j = 0; j < local.cols(); ++j) {
    for (Eigen::Index i = 0; i < local.rows(); ++i) {
      const double v = local(i, j);
      if (v != 0.0) out.emplace_back(row_offset + rows[i], col_offset + cols[j], scale * v);
    }
  }
}

// Full-cell tensor Gauss points and weights.
void tensor_points(const BackgroundMesh& mesh, CellId c, int points_per_axis, std::vector<Point>& pts,
                   std::vector<double>& wts) {
  const Rule1D g = gauss_legendre(points_per_axis);
  const Point o = mesh.lower_left(c);
  const double s = mesh.cell_size();
  pts.clear();
  wts.clear();
  for (std::size_t j = 0; j < g.size(); ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      pts.emplace_back(o.x() + s * g.points[i], o.y() + s * g.points[j]);
      wts.push_back(s * s * g.weights[i] * g.weights[j]);
    }
  }
}

// Local matrix A^T diag(w) B.
MatrixXd weighted_product(const MatrixXd& a, const std::vector<double>& w, const MatrixXd& b) {
  const Eigen::Map<const VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  return a.transpose() * wv.asDiagonal() * b;
}

}  // namespace

NitscheParams NitscheParams::for_degree(int r) { return {20.0 * r * r, 2.0 * r * r}; }

void validate(const FormsConfig& config) {
  if (!(config.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  if (!(config.nitsche.gamma1 > 0.0) || !(config.nitsche.gamma2 > 0.0)) {
    throw std::invalid_argument("Nitsche parameters must be positive");
  }
  if (config.ghost.gv_tilde < 0.0 || config.ghost.gp_tilde < 0.0) {
    throw std::invalid_argument("ghost-penalty scales must be nonnegative");
  }
}

SparseMatrix SpatialOperator::total() const {
  return viscous + pressure_gradient + divergence + nitsche + ghost;
}

FormAssembler::FormAssembler(const TaylorHoodSpace& space, const CutGeometry& geometry,
                             const StabilizationSubmesh& submesh, const FormsConfig& config)
    : space_(&space), geometry_(&geometry), submesh_(&submesh), config_(config) {
  validate(config);
  const auto& mesh = space.mesh();
  if (&mesh != &geometry.mesh() || static_cast<int>(submesh.contains.size()) != mesh.num_cells()) {
    throw std::invalid_argument("space, geometry and submesh must share one mesh");
  }
  for (int id = 0; id < mesh.num_cells(); ++id) {
    const CellId c{id};
    if (!geometry.has_fluid(c)) continue;
    const VolumeRule& rule = geometry.volume(c);
    if (rule.points.empty()) {
      if (geometry.cell_class(c) == CellClass::Cut && !rule.sliver) {
        throw std::runtime_error("missing volume quadrature for cut cell " + std::to_string(id));
      }
      continue;
    }
    CellTables t;
    t.cell = c;
    t.points = rule.points;
    t.weights = rule.weights;
    t.vel = space.velocity().tabulate(c, t.points);
    t.pres = space.pressure().tabulate(c, t.points);
    t.vel_dofs = space.velocity().cell_dofs(c);
    t.pres_dofs = space.pressure().cell_dofs(c);
    fluid_cells_.push_back(std::move(t));

    if (geometry.cell_class(c) == CellClass::Cut) {
      const SurfaceRule& s = geometry.surface(c);
      if (s.points.empty()) throw std::runtime_error("missing surface rule for cut cell " + std::to_string(id));
      BoundaryTables b;
      b.cell = c;
      b.h = mesh.diameter();
      b.points = s.points;
      b.weights = s.weights;
      b.normals = s.normals;
      b.vel = space.velocity().tabulate(c, b.points);
      b.pres = space.pressure().tabulate(c, b.points);
      b.vel_dofs = space.velocity().cell_dofs(c);
      b.pres_dofs = space.pressure().cell_dofs(c);
      boundary_.push_back(std::move(b));
    }
  }
  if (config.outer == OuterBoundary::Nitsche) {
    const Rule1D g = gauss_legendre(gauss_points_for_degree(geometry.surface_degree()));
    for (const auto& bf : mesh.boundary_faces()) {
      BoundaryTables b;
      b.cell = bf.cell;
      b.h = mesh.diameter();
      const double len = (bf.b - bf.a).norm();
      for (std::size_t q = 0; q < g.size(); ++q) {
        b.points.push_back(bf.a + g.points[q] * (bf.b - bf.a));
        b.weights.push_back(len * g.weights[q]);
        b.normals.push_back(bf.normal);
      }
      b.vel = space.velocity().tabulate(bf.cell, b.points);
      b.pres = space.pressure().tabulate(bf.cell, b.points);
      b.vel_dofs = space.velocity().cell_dofs(bf.cell);
      b.pres_dofs = space.pressure().cell_dofs(bf.cell);
      boundary_.push_back(std::move(b));
    }
  }
}

SparseMatrix FormAssembler::from_triplets(const Triplets& t) const {
  SparseMatrix m(size(), size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix FormAssembler::viscous() const {
  const auto& sp = *space_;
  Triplets t;
  for (const auto& c : fluid_cells_) {
    const MatrixXd k = config_.nu * (weighted_product(c.vel.dx, c.weights, c.vel.dx) +
                                     weighted_product(c.vel.dy, c.weights, c.vel.dy));
    scatter(t, k, c.vel_dofs, sp.ux_offset(), c.vel_dofs, sp.ux_offset());
    scatter(t, k, c.vel_dofs, sp.uy_offset(), c.vel_dofs, sp.uy_offset());
  }
  return from_triplets(t);
}

SparseMatrix FormAssembler::pressure_gradient() const {
  const auto& sp = *space_;
  Triplets t;
  for (const auto& c : fluid_cells_) {
    scatter(t, weighted_product(c.vel.dx, c.weights, c.pres.value), c.vel_dofs, sp.ux_offset(), c.pres_dofs,
            sp.p_offset(), -1.0);
    scatter(t, weighted_product(c.vel.dy, c.weights, c.pres.value), c.vel_dofs, sp.uy_offset(), c.pres_dofs,
            sp.p_offset(), -1.0);
  }
  return from_triplets(t);
}

SparseMatrix FormAssembler::divergence() const {
  const auto& sp = *space_;
  Triplets t;
  for (const auto& c : fluid_cells_) {
    scatter(t, weighted_product(c.pres.value, c.weights, c.vel.dx), c.pres_dofs, sp.p_offset(), c.vel_dofs,
            sp.ux_offset());
    scatter(t, weighted_product(c.pres.value, c.weights, c.vel.dy), c.pres_dofs, sp.p_offset(), c.vel_dofs,
            sp.uy_offset());
  }
  return from_triplets(t);
}

SparseMatrix FormAssembler::nitsche_matrix() const {
  const auto& sp = *space_;
  const double nu = config_.nu;
  const int off[2] = {sp.ux_offset(), sp.uy_offset()};
  Triplets t;
  for (const auto& b : boundary_) {
    const auto nq = static_cast<Eigen::Index>(b.points.size());
    const auto nv = b.vel.value.cols();
    MatrixXd normal_grad(nq, nv);
    for (Eigen::Index q = 0; q < nq; ++q) {
      normal_grad.row(q) = b.normals[q].x() * b.vel.dx.row(q) + b.normals[q].y() * b.vel.dy.row(q);
    }
    const MatrixXd mass = weighted_product(b.vel.value, b.weights, b.vel.value);
    const MatrixXd cons = weighted_product(b.vel.value, b.weights, normal_grad);  // (phi_i, dn phi_j)
    // consistency -nu (dn v, psi), adjoint -nu (v, dn psi), penalty gamma1 nu / h (v, psi)
    const MatrixXd same = -nu * cons - nu * cons.transpose() + (config_.nitsche.gamma1 * nu / b.h) * mass;
    for (int c = 0; c < 2; ++c) scatter(t, same, b.vel_dofs, off[c], b.vel_dofs, off[c]);

    for (int c = 0; c < 2; ++c) {
      std::vector<double> wc(b.weights.size());
      for (std::size_t q = 0; q < wc.size(); ++q) wc[q] = b.weights[q] * b.normals[q][c];
      // (p n, psi) and -(v . n, xi)
      const MatrixXd vp = weighted_product(b.vel.value, wc, b.pres.value);
      scatter(t, vp, b.vel_dofs, off[c], b.pres_dofs, sp.p_offset());
      scatter(t, vp.transpose(), b.pres_dofs, sp.p_offset(), b.vel_dofs, off[c], -1.0);
      for (int d = 0; d < 2; ++d) {
        std::vector<double> wcd(b.weights.size());
        for (std::size_t q = 0; q < wcd.size(); ++q) {
          wcd[q] = b.weights[q] * b.normals[q][c] * b.normals[q][d] * config_.nitsche.gamma2 / b.h;
        }
        scatter(t, weighted_product(b.vel.value, wcd, b.vel.value), b.vel_dofs, off[c], b.vel_dofs, off[d]);
      }
    }
  }
  return from_triplets(t);
}

void FormAssembler::for_each_ghost_patch(const PatchVisitor& visit) const {
  const auto& sp = *space_;
  const auto& mesh = sp.mesh();
  const double nu = config_.nu;
  const double gv = config_.ghost.gamma_v(nu, mesh.diameter());
  const double gp = config_.ghost.gamma_p(nu);
  if (gv == 0.0 && gp == 0.0) return;

  const int npts = sp.velocity_degree() + 1;
  std::vector<Point> p1, p2;
  std::vector<double> w1, w2;

  // jump of the two cell polynomials at the patch points; columns follow
  // the merged dof list of both cells
  auto patch_jump = [](const ScalarSpace& space, CellId k1, CellId k2, const std::vector<Point>& pts,
                       std::vector<int>& dofs) {
    const auto d1 = space.cell_dofs(k1);
    const auto d2 = space.cell_dofs(k2);
    dofs = d1;
    std::vector<int> pos2(d2.size());
    for (std::size_t l = 0; l < d2.size(); ++l) {
      const auto it = std::find(dofs.begin(), dofs.end(), d2[l]);
      pos2[l] = static_cast<int>(it - dofs.begin());
      if (it == dofs.end()) dofs.push_back(d2[l]);
    }
    const BasisTable e1 = space.tabulate(k1, pts);
    const BasisTable e2 = space.tabulate(k2, pts);
    MatrixXd jump = MatrixXd::Zero(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(dofs.size()));
    jump.leftCols(e1.value.cols()) = e1.value;
    for (std::size_t l = 0; l < d2.size(); ++l) jump.col(pos2[l]) -= e2.value.col(static_cast<Eigen::Index>(l));
    return jump;
  };

  for (FaceId f : submesh_->faces) {
    const Face& face = mesh.face(f);
    tensor_points(mesh, face.left, npts, p1, w1);
    tensor_points(mesh, face.right, npts, p2, w2);
    p1.insert(p1.end(), p2.begin(), p2.end());
    w1.insert(w1.end(), w2.begin(), w2.end());
    std::vector<int> dofs;
    if (gv != 0.0) {
      const MatrixXd jump = patch_jump(sp.velocity(), face.left, face.right, p1, dofs);
      visit(jump, w1, dofs, sp.ux_offset(), gv);
      visit(jump, w1, dofs, sp.uy_offset(), gv);
    }
    if (gp != 0.0) {
      const MatrixXd jump = patch_jump(sp.pressure(), face.left, face.right, p1, dofs);
      visit(jump, w1, dofs, sp.p_offset(), gp);
    }
  }
}

SparseMatrix FormAssembler::ghost_penalty() const {
  Triplets t;
  for_each_ghost_patch([&](const MatrixXd& jump, const std::vector<double>& w, const std::vector<int>& dofs,
                           int offset, double gamma) {
    scatter(t, weighted_product(jump, w, jump), dofs, offset, dofs, offset, gamma);
  });
  return from_triplets(t);
}

double FormAssembler::ghost_penalty_energy(const VectorXd& state) const {
  if (state.size() != size()) throw std::invalid_argument("ghost_penalty_energy: state size mismatch");
  double sum = 0.0;
  for_each_ghost_patch([&](const MatrixXd& jump, const std::vector<double>& w, const std::vector<int>& dofs,
                           int offset, double gamma) {
    VectorXd local(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t l = 0; l < dofs.size(); ++l) local[static_cast<Eigen::Index>(l)] = state[offset + dofs[l]];
    const VectorXd j = jump * local;
    for (Eigen::Index q = 0; q < j.size(); ++q) sum += gamma * w[static_cast<std::size_t>(q)] * j[q] * j[q];
  });
  return sum;
}

SpatialOperator FormAssembler::linear_operator() const {
  return {viscous(), pressure_gradient(), divergence(), nitsche_matrix(), ghost_penalty()};
}

VectorXd FormAssembler::volume_rhs(const VectorFunction& f) const {
  const auto& sp = *space_;
  VectorXd out = VectorXd::Zero(size());
  for (const auto& c : fluid_cells_) {
    for (std::size_t q = 0; q < c.points.size(); ++q) {
      const Eigen::Vector2d fv = f(c.points[q]) * c.weights[q];
      for (std::size_t l = 0; l < c.vel_dofs.size(); ++l) {
        const double phi = c.vel.value(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(l));
        out[sp.ux_offset() + c.vel_dofs[l]] += fv.x() * phi;
        out[sp.uy_offset() + c.vel_dofs[l]] += fv.y() * phi;
      }
    }
  }
  return out;
}

VectorXd FormAssembler::nitsche_rhs(const VectorFunction& g) const {
  const auto& sp = *space_;
  const double nu = config_.nu;
  const int off[2] = {sp.ux_offset(), sp.uy_offset()};
  VectorXd out = VectorXd::Zero(size());
  for (const auto& b : boundary_) {
    for (std::size_t q = 0; q < b.points.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const Eigen::Vector2d gv = g(b.points[q]);
      const Point& n = b.normals[q];
      const double w = b.weights[q];
      const double gn = gv.dot(n);
      for (std::size_t l = 0; l < b.vel_dofs.size(); ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        const double phi = b.vel.value(qi, li);
        const double dn = n.x() * b.vel.dx(qi, li) + n.y() * b.vel.dy(qi, li);
        for (int c = 0; c < 2; ++c) {
          out[off[c] + b.vel_dofs[l]] += w * (-nu * gv[c] * dn + config_.nitsche.gamma1 * nu / b.h * gv[c] * phi +
                                               config_.nitsche.gamma2 / b.h * gn * n[c] * phi);
        }
      }
      for (std::size_t l = 0; l < b.pres_dofs.size(); ++l) {
        out[sp.p_offset() + b.pres_dofs[l]] -= w * gn * b.pres.value(qi, static_cast<Eigen::Index>(l));
      }
    }
  }
  return out;
}

ConvectionResult FormAssembler::convection(const VectorXd& state, bool with_jacobian) const {
  const auto& sp = *space_;
  if (state.size() != size()) throw std::invalid_argument("convection: state size mismatch");
  ConvectionResult res;
  res.residual = VectorXd::Zero(size());
  Triplets t;
  for (const auto& c : fluid_cells_) {
    const auto nv = static_cast<Eigen::Index>(c.vel_dofs.size());
    VectorXd ux(nv), uy(nv);
    for (Eigen::Index l = 0; l < nv; ++l) {
      ux[l] = state[sp.ux_offset() + c.vel_dofs[l]];
      uy[l] = state[sp.uy_offset() + c.vel_dofs[l]];
    }
    const VectorXd vx = c.vel.value * ux;
    const VectorXd vy = c.vel.value * uy;
    const VectorXd vxx = c.vel.dx * ux, vxy = c.vel.dy * ux;
    const VectorXd vyx = c.vel.dx * uy, vyy = c.vel.dy * uy;
    const Eigen::Map<const VectorXd> w(c.weights.data(), static_cast<Eigen::Index>(c.weights.size()));

    const VectorXd conv_x = w.cwiseProduct(vx.cwiseProduct(vxx) + vy.cwiseProduct(vxy));
    const VectorXd conv_y = w.cwiseProduct(vx.cwiseProduct(vyx) + vy.cwiseProduct(vyy));
    const VectorXd rx = c.vel.value.transpose() * conv_x;
    const VectorXd ry = c.vel.value.transpose() * conv_y;
    for (Eigen::Index l = 0; l < nv; ++l) {
      res.residual[sp.ux_offset() + c.vel_dofs[l]] += rx[l];
      res.residual[sp.uy_offset() + c.vel_dofs[l]] += ry[l];
    }
    if (!with_jacobian) continue;

    // (v . grad) delta_v part, shared by both components
    const MatrixXd adv = vx.asDiagonal() * c.vel.dx + vy.asDiagonal() * c.vel.dy;
    const MatrixXd base = c.vel.value.transpose() * w.asDiagonal();
    const MatrixXd transport = base * adv;
    const MatrixXd jxx = transport + base * vxx.asDiagonal() * c.vel.value;
    const MatrixXd jxy = base * vxy.asDiagonal() * c.vel.value;
    const MatrixXd jyx = base * vyx.asDiagonal() * c.vel.value;
    const MatrixXd jyy = transport + base * vyy.asDiagonal() * c.vel.value;
    scatter(t, jxx, c.vel_dofs, sp.ux_offset(), c.vel_dofs, sp.ux_offset());
    scatter(t, jxy, c.vel_dofs, sp.ux_offset(), c.vel_dofs, sp.uy_offset());
    scatter(t, jyx, c.vel_dofs, sp.uy_offset(), c.vel_dofs, sp.ux_offset());
    scatter(t, jyy, c.vel_dofs, sp.uy_offset(), c.vel_dofs, sp.uy_offset());
  }
  if (with_jacobian) res.jacobian = from_triplets(t);
  return res;
}

SparseMatrix FormAssembler::fluid_mass() const {
  const auto& sp = *space_;
  Triplets t;
  for (const auto& c : fluid_cells_) {
    const MatrixXd m = weighted_product(c.vel.value, c.weights, c.vel.value);
    scatter(t, m, c.vel_dofs, sp.ux_offset(), c.vel_dofs, sp.ux_offset());
    scatter(t, m, c.vel_dofs, sp.uy_offset(), c.vel_dofs, sp.uy_offset());
  }
  return from_triplets(t);
}

SparseMatrix FormAssembler::cell_mass(const std::vector<char>& cells) const {
  const auto& sp = *space_;
  const auto& mesh = sp.mesh();
  if (static_cast<int>(cells.size()) != mesh.num_cells()) throw std::invalid_argument("cell mask size mismatch");
  Triplets t;
  std::vector<Point> pts;
  std::vector<double> wts;
  for (int id = 0; id < mesh.num_cells(); ++id) {
    if (!cells[id]) continue;
    const CellId c{id};
    tensor_points(mesh, c, sp.velocity_degree() + 1, pts, wts);
    const BasisTable tab = sp.velocity().tabulate(c, pts);
    const MatrixXd m = weighted_product(tab.value, wts, tab.value);
    const auto dofs = sp.velocity().cell_dofs(c);
    scatter(t, m, dofs, sp.ux_offset(), dofs, sp.ux_offset());
    scatter(t, m, dofs, sp.uy_offset(), dofs, sp.uy_offset());
  }
  return from_triplets(t);
}

SparseMatrix FormAssembler::jump_mass() const {
  const int n = space_->mesh().num_cells();
  std::vector<char> cells(n, 1);
  if (config_.jump == JumpDomain::Stabilized) {
    for (int id = 0; id < n; ++id) {
      const CellId c{id};
      cells[id] = geometry_->has_fluid(c) || submesh_->in_submesh(c);
    }
  }
  return cell_mass(cells);
}

VectorXd FormAssembler::pressure_mean_functional() const {
  const auto& sp = *space_;
  VectorXd m = VectorXd::Zero(size());
  for (const auto& c : fluid_cells_) {
    for (std::size_t q = 0; q < c.points.size(); ++q) {
      for (std::size_t l = 0; l < c.pres_dofs.size(); ++l) {
        m[sp.p_offset() + c.pres_dofs[l]] +=
            c.weights[q] * c.pres.value(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(l));
      }
    }
  }
  return m;
}

void FormAssembler::dump_coordinates(std::ostream& os, const SparseMatrix& m) {
  const auto old = os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }
  os.precision(old);
}

}  // namespace cutfem
