#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cutfem/fe_space.hpp"
#include "cutfem/geometry.hpp"

namespace cutfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Nitsche penalty weights; both must be positive.
struct NitscheParams {
  double gamma1 = 80.0;
  double gamma2 = 8.0;

  /// gamma1 = 20 r^2, gamma2 = 2 r^2.
  static NitscheParams for_degree(int r);
};

/// Ghost-penalty scales. The face weights are
///   gamma_v = gv_tilde (1/nu + nu) / h^2,   gamma_p = gp_tilde / nu.
/// Zero scales switch the stabilization off.
struct GhostPenaltyParams {
  double gv_tilde = 0.05;
  double gp_tilde = 0.05;

  double gamma_v(double nu, double h) const { return gv_tilde * (1.0 / nu + nu) / (h * h); }
  double gamma_p(double nu) const { return gp_tilde / nu; }
};

enum class OuterBoundary { Strong, Nitsche };
/// Domain of the inner product in the dG jump term.
enum class JumpDomain { Full, Stabilized };

struct FormsConfig {
  double nu = 1.0;
  NitscheParams nitsche;
  GhostPenaltyParams ghost;
  OuterBoundary outer = OuterBoundary::Strong;
  JumpDomain jump = JumpDomain::Full;
};

void validate(const FormsConfig& config);

/// Linear spatial operator split by term. Each matrix acts on the full
/// Taylor-Hood vector.
struct SpatialOperator {
  SparseMatrix viscous;            // nu (grad v, grad psi) over the fluid
  SparseMatrix pressure_gradient;  // -(p, div psi) over the fluid
  SparseMatrix divergence;         // (div v, xi) over the fluid
  SparseMatrix nitsche;            // boundary consistency, adjoint and penalty terms
  SparseMatrix ghost;              // face-patch stabilization

  SparseMatrix total() const;
};

struct ConvectionResult {
  Eigen::VectorXd residual;
  SparseMatrix jacobian;  // empty unless requested
};

/// Assembles all spatial forms of the unfitted Navier-Stokes discretization
/// at a fixed time on a fixed geometry. Holds references to the space,
/// geometry and submesh, which must outlive it.
class FormAssembler {
 public:
  FormAssembler(const TaylorHoodSpace& space, const CutGeometry& geometry,
                const StabilizationSubmesh& submesh, const FormsConfig& config);

  const TaylorHoodSpace& space() const { return *space_; }
  const CutGeometry& geometry() const { return *geometry_; }
  const StabilizationSubmesh& submesh() const { return *submesh_; }
  const FormsConfig& config() const { return config_; }
  int size() const { return space_->total_dofs(); }

  SparseMatrix viscous() const;
  SparseMatrix pressure_gradient() const;
  SparseMatrix divergence() const;
  SparseMatrix nitsche_matrix() const;
  SparseMatrix ghost_penalty() const;
  /// S(u, u) summed from pointwise patch jumps; unlike u . (S u) it does not
  /// lose accuracy to cancellation when u is (nearly) in the kernel.
  double ghost_penalty_energy(const Eigen::VectorXd& state) const;
  SpatialOperator linear_operator() const;

  /// (f, psi) over the fluid.
  Eigen::VectorXd volume_rhs(const VectorFunction& f) const;
  /// B(g, phi) on the weakly imposed boundary.
  Eigen::VectorXd nitsche_rhs(const VectorFunction& g) const;

  /// ((v . grad) v, psi) and, optionally, its exact Jacobian.
  ConvectionResult convection(const Eigen::VectorXd& state, bool with_jacobian) const;

  /// Velocity mass matrix over the fluid.
  SparseMatrix fluid_mass() const;
  /// Velocity mass matrix for the dG jump term (over the whole square, or
  /// over fluid and stabilized cells, per the configured JumpDomain).
  SparseMatrix jump_mass() const;
  /// Velocity mass matrix over all cells flagged in `cells`, with full-cell rules.
  SparseMatrix cell_mass(const std::vector<char>& cells) const;

  /// Row vector m with m . p = integral of p over the fluid.
  Eigen::VectorXd pressure_mean_functional() const;

  /// Writes "row col value" lines.
  static void dump_coordinates(std::ostream& os, const SparseMatrix& m);

 private:
  struct CellTables {
    CellId cell;
    std::vector<Point> points;
    std::vector<double> weights;
    BasisTable vel;
    BasisTable pres;
    std::vector<int> vel_dofs;
    std::vector<int> pres_dofs;
  };
  struct BoundaryTables {
    CellId cell;
    double h = 0.0;
    std::vector<Point> points;
    std::vector<double> weights;
    std::vector<Point> normals;
    BasisTable vel;
    BasisTable pres;
    std::vector<int> vel_dofs;
    std::vector<int> pres_dofs;
  };

  using PatchVisitor = std::function<void(const Eigen::MatrixXd& jump, const std::vector<double>& weights,
                                          const std::vector<int>& dofs, int offset, double gamma)>;
  void for_each_ghost_patch(const PatchVisitor& visit) const;
  SparseMatrix from_triplets(const Triplets& t) const;

  const TaylorHoodSpace* space_;
  const CutGeometry* geometry_;
  const StabilizationSubmesh* submesh_;
  FormsConfig config_;
  std::vector<CellTables> fluid_cells_;
  std::vector<BoundaryTables> boundary_;
};

}  // namespace cutfem
