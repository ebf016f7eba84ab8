#include "cutfem/fe_space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "cutfem/quadrature.hpp"

namespace cutfem {

LagrangeBasis1D::LagrangeBasis1D(int degree) : degree_(degree) {
  if (degree < 1) throw std::invalid_argument("Lagrange degree must be >= 1");
  nodes_ = gauss_lobatto(degree + 1).points;
  denom_.assign(degree + 1, 1.0);
  for (int i = 0; i <= degree; ++i) {
    for (int m = 0; m <= degree; ++m) {
      if (m != i) denom_[i] *= nodes_[i] - nodes_[m];
    }
  }
}

void LagrangeBasis1D::eval(double xi, double* values, double* derivatives) const {
  const int n = degree_ + 1;
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    double d = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == i) continue;
      // product rule, accumulated incrementally
      d = d * (xi - nodes_[m]) + v;
      v *= xi - nodes_[m];
    }
    values[i] = v / denom_[i];
    if (derivatives) derivatives[i] = d / denom_[i];
  }
}

ScalarSpace::ScalarSpace(const BackgroundMesh& mesh, int degree)
    : mesh_(&mesh), basis_(degree), per_axis_(degree * mesh.cells_per_axis() + 1) {}

std::vector<int> ScalarSpace::cell_dofs(CellId c) const {
  const auto [i, j] = mesh_->grid(c);
  const int r = degree();
  std::vector<int> dofs;
  dofs.reserve(dofs_per_cell());
  for (int b = 0; b <= r; ++b) {
    for (int a = 0; a <= r; ++a) dofs.push_back((r * i + a) + (r * j + b) * per_axis_);
  }
  return dofs;
}

Point ScalarSpace::node(int dof) const {
  if (dof < 0 || dof >= dof_count()) throw std::out_of_range("invalid dof " + std::to_string(dof));
  const int r = degree();
  const int gi = dof % per_axis_;
  const int gj = dof / per_axis_;
  const double s = mesh_->cell_size();
  // the last node of the last cell sits at offset r of cell N-1
  const int ci = std::min(gi / r, mesh_->cells_per_axis() - 1);
  const int cj = std::min(gj / r, mesh_->cells_per_axis() - 1);
  const auto& xi = basis_.nodes();
  return Point(s * (ci + xi[gi - r * ci]), s * (cj + xi[gj - r * cj]));
}

bool ScalarSpace::on_boundary(int dof) const {
  const int gi = dof % per_axis_;
  const int gj = dof / per_axis_;
  return gi == 0 || gj == 0 || gi == per_axis_ - 1 || gj == per_axis_ - 1;
}

BasisTable ScalarSpace::tabulate(CellId c, std::span<const Point> points) const {
  const int n1 = degree() + 1;
  const Point origin = mesh_->lower_left(c);
  const double inv = 1.0 / mesh_->cell_size();
  BasisTable t;
  t.value.resize(points.size(), n1 * n1);
  t.dx.resize(points.size(), n1 * n1);
  t.dy.resize(points.size(), n1 * n1);
  std::vector<double> vx(n1), dvx(n1), vy(n1), dvy(n1);
  for (std::size_t q = 0; q < points.size(); ++q) {
    basis_.eval((points[q].x() - origin.x()) * inv, vx.data(), dvx.data());
    basis_.eval((points[q].y() - origin.y()) * inv, vy.data(), dvy.data());
    for (int b = 0; b < n1; ++b) {
      for (int a = 0; a < n1; ++a) {
        const int l = a + b * n1;
        t.value(q, l) = vx[a] * vy[b];
        t.dx(q, l) = dvx[a] * vy[b] * inv;
        t.dy(q, l) = vx[a] * dvy[b] * inv;
      }
    }
  }
  return t;
}

double ScalarSpace::evaluate(const Eigen::VectorXd& coeffs, const Point& p) const {
  return evaluate(coeffs, mesh_->locate(p), p);
}

double ScalarSpace::evaluate(const Eigen::VectorXd& coeffs, CellId c, const Point& p) const {
  const BasisTable t = tabulate(c, std::span<const Point>(&p, 1));
  const auto dofs = cell_dofs(c);
  double v = 0.0;
  for (std::size_t l = 0; l < dofs.size(); ++l) v += t.value(0, l) * coeffs[dofs[l]];
  return v;
}

Eigen::VectorXd interpolate(const ScalarSpace& space, const ScalarFunction& f) {
  Eigen::VectorXd out(space.dof_count());
  for (int d = 0; d < space.dof_count(); ++d) out[d] = f(space.node(d));
  return out;
}

TaylorHoodSpace::TaylorHoodSpace(const BackgroundMesh& mesh, int velocity_degree)
    : velocity_(mesh, velocity_degree), pressure_(mesh, std::max(velocity_degree - 1, 1)) {
  if (velocity_degree < 2) throw std::invalid_argument("Taylor-Hood requires velocity degree >= 2");
}

TaylorHoodSpace build_taylor_hood(const BackgroundMesh& mesh, int velocity_degree) {
  return TaylorHoodSpace(mesh, velocity_degree);
}

Eigen::VectorXd interpolate(const TaylorHoodSpace& space, const VectorFunction& velocity,
                            const ScalarFunction& pressure) {
  Eigen::VectorXd out(space.total_dofs());
  const auto& v = space.velocity();
  for (int d = 0; d < v.dof_count(); ++d) {
    const Eigen::Vector2d val = velocity(v.node(d));
    out[space.ux_offset() + d] = val.x();
    out[space.uy_offset() + d] = val.y();
  }
  out.segment(space.p_offset(), space.pressure_dofs()) = interpolate(space.pressure(), pressure);
  return out;
}

int DofActivity::inactive_count() const {
  return static_cast<int>(std::count(active.begin(), active.end(), 0));
}

DofActivity compute_dof_activity(const TaylorHoodSpace& space, const std::vector<char>& cell_relevant) {
  const auto& mesh = space.mesh();
  if (static_cast<int>(cell_relevant.size()) != mesh.num_cells()) {
    throw std::invalid_argument("cell mask size does not match mesh");
  }
  DofActivity act;
  act.active.assign(space.total_dofs(), 0);
  for (int id = 0; id < mesh.num_cells(); ++id) {
    if (!cell_relevant[id]) continue;
    const CellId c{id};
    for (int d : space.velocity().cell_dofs(c)) {
      act.active[space.ux_offset() + d] = 1;
      act.active[space.uy_offset() + d] = 1;
    }
    for (int d : space.pressure().cell_dofs(c)) act.active[space.p_offset() + d] = 1;
  }
  return act;
}

DofActivity compute_dof_activity(const TaylorHoodSpace& space, const CutGeometry& geometry,
                                 const StabilizationSubmesh& submesh) {
  const int n = space.mesh().num_cells();
  std::vector<char> relevant(n, 0);
  for (int id = 0; id < n; ++id) {
    const CellId c{id};
    relevant[id] = geometry.has_fluid(c) || submesh.in_submesh(c);
  }
  return compute_dof_activity(space, relevant);
}

}  // namespace cutfem
