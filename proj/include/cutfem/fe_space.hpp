#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cutfem/geometry.hpp"
#include "cutfem/mesh.hpp"

namespace cutfem {

/// Lagrange polynomials of degree p on the Gauss-Lobatto nodes of [0, 1].
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(int degree);

  int degree() const { return degree_; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Values and derivatives of all p + 1 basis polynomials at xi (any real).
  void eval(double xi, double* values, double* derivatives) const;

 private:
  int degree_;
  std::vector<double> nodes_;
  std::vector<double> denom_;
};

/// Basis values and gradients of one cell's local functions at a point set;
/// rows are points, columns local dofs.
struct BasisTable {
  Eigen::MatrixXd value;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};

/// Continuous Q_r Lagrange space on the background mesh. Global node (I, J)
/// has index I + J (rN + 1); the local dof (a, b) of cell (i, j) maps to
/// node (ri + a, rj + b). Local dofs are ordered a + b (r + 1).
///
/// The space keeps a pointer to the mesh, which must outlive it.
class ScalarSpace {
 public:
  ScalarSpace(const BackgroundMesh& mesh, int degree);

  const BackgroundMesh& mesh() const { return *mesh_; }
  int degree() const { return basis_.degree(); }
  int nodes_per_axis() const { return per_axis_; }
  int dof_count() const { return per_axis_ * per_axis_; }
  int dofs_per_cell() const { return (degree() + 1) * (degree() + 1); }

  std::vector<int> cell_dofs(CellId c) const;
  Point node(int dof) const;
  bool on_boundary(int dof) const;

  /// Tabulates the polynomial of `c` at arbitrary points, including points
  /// outside the cell (polynomial extension).
  BasisTable tabulate(CellId c, std::span<const Point> points) const;

  /// Evaluates a coefficient vector at p, using the cell that contains p.
  double evaluate(const Eigen::VectorXd& coeffs, const Point& p) const;
  /// Evaluates using the polynomial of cell `c` (p may lie outside c).
  double evaluate(const Eigen::VectorXd& coeffs, CellId c, const Point& p) const;

 private:
  const BackgroundMesh* mesh_;
  LagrangeBasis1D basis_;
  int per_axis_;
};

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Eigen::Vector2d(const Point&)>;

Eigen::VectorXd interpolate(const ScalarSpace& space, const ScalarFunction& f);

/// Taylor-Hood pair Q_r^2 x Q_{r-1}. Global vector layout: velocity x block,
/// velocity y block, pressure block.
class TaylorHoodSpace {
 public:
  TaylorHoodSpace(const BackgroundMesh& mesh, int velocity_degree);

  const BackgroundMesh& mesh() const { return velocity_.mesh(); }
  const ScalarSpace& velocity() const { return velocity_; }
  const ScalarSpace& pressure() const { return pressure_; }
  int velocity_degree() const { return velocity_.degree(); }

  int velocity_dofs() const { return velocity_.dof_count(); }
  int pressure_dofs() const { return pressure_.dof_count(); }
  int total_dofs() const { return 2 * velocity_dofs() + pressure_dofs(); }
  int ux_offset() const { return 0; }
  int uy_offset() const { return velocity_dofs(); }
  int p_offset() const { return 2 * velocity_dofs(); }

 private:
  ScalarSpace velocity_;
  ScalarSpace pressure_;
};

TaylorHoodSpace build_taylor_hood(const BackgroundMesh& mesh, int velocity_degree);

Eigen::VectorXd interpolate(const TaylorHoodSpace& space, const VectorFunction& velocity,
                            const ScalarFunction& pressure);

/// Per-dof activity mask over the Taylor-Hood layout.
struct DofActivity {
  std::vector<char> active;

  int inactive_count() const;
  bool is_active(int dof) const { return active[dof] != 0; }
};

/// A dof is active when any cell of its support is flagged in `cell_relevant`.
DofActivity compute_dof_activity(const TaylorHoodSpace& space, const std::vector<char>& cell_relevant);

/// Relevant cells are Fluid/Cut cells and cells of the stabilization submesh.
DofActivity compute_dof_activity(const TaylorHoodSpace& space, const CutGeometry& geometry,
                                 const StabilizationSubmesh& submesh);

}  // namespace cutfem
