#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cutfem/fe_space.hpp"
#include "cutfem/forms.hpp"
#include "cutfem/quadrature.hpp"

namespace cutfem {

/// Lagrange basis of degree k on the reference slab [0, 1] with nodes at the
/// k + 1 Gauss-Legendre points, together with the (k + 2)-point Gauss rule
/// used for all time integrals on a slab.
class TemporalBasis {
 public:
  explicit TemporalBasis(int k);

  int degree() const { return k_; }
  int size() const { return k_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  const Rule1D& quadrature() const { return quad_; }

  void eval(double s, double* values, double* derivatives = nullptr) const;
  std::vector<double> values(double s) const;

  /// D(b, a) = int_0^1 l_a' l_b ds.
  const Eigen::MatrixXd& derivative_matrix() const { return deriv_; }
  /// T(b, a) = int_0^1 l_a l_b ds.
  const Eigen::MatrixXd& mass_matrix() const { return mass_; }
  /// l_a(0).
  const Eigen::VectorXd& left_trace() const { return left_; }

 private:
  int k_;
  std::vector<double> nodes_;
  std::vector<double> denom_;
  Rule1D quad_;
  Eigen::MatrixXd deriv_;
  Eigen::MatrixXd mass_;
  Eigen::VectorXd left_;
};

struct Slab {
  int index = 0;
  double t0 = 0.0;
  double t1 = 0.0;

  double tau() const { return t1 - t0; }
  double time(double s) const { return t0 + s * tau(); }
};

/// Uniform slabs of (0, T].
std::vector<Slab> uniform_slabs(double final_time, int count);

/// Spatial operators of a linear dG(k) slab problem
///   sum_a D(b,a) M_t U_a + l_b(0) M_j (U(0+) - U_prev) + tau sum_a T(b,a) K U_a = F_b.
struct LinearSlabOperators {
  SparseMatrix time_mass;
  SparseMatrix jump_mass;
  SparseMatrix stiffness;
};

/// Block matrix of the linear slab problem, (k+1) n square, mode-major.
SparseMatrix assemble_linear_slab_matrix(const TemporalBasis& basis, double tau, const LinearSlabOperators& ops);

/// Value of a mode-major slab coefficient vector at reference time s.
Eigen::VectorXd evaluate_in_time(const TemporalBasis& basis, const Eigen::VectorXd& coeffs, int n, double s);

/// dG(k) solution of u' = lambda u, u(0) = u0 on (0, T] with M slabs, using
/// the same slab assembly as the flow solver on 1 x 1 spatial operators.
struct OdeResult {
  std::vector<double> end_values;  // u_h(t_n^-) per slab
  double endpoint_error = 0.0;     // |u_h(T^-) - u(T)|
  double max_error = 0.0;          // sampled sup-norm error over (0, T]
};
OdeResult solve_scalar_ode(double lambda, double u0, double final_time, int slabs, int k);

struct NewtonSettings {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_iterations = 20;
  void validate() const;
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double last_residual() const { return residual_; }

 private:
  double residual_;
};

class SlabFailure : public std::runtime_error {
 public:
  SlabFailure(int slab, const std::string& what)
      : std::runtime_error("slab " + std::to_string(slab) + ": " + what), slab_(slab) {}
  int slab() const { return slab_; }

 private:
  int slab_;
};

using SpaceTimeVector = std::function<Eigen::Vector2d(const Point&, double)>;

/// Right-hand side data of the flow problem.
struct FlowData {
  SpaceTimeVector source;    // f
  SpaceTimeVector boundary;  // g on the weakly imposed boundary
};

/// Time-integrated load of one slab, per test mode.
struct SlabLoad {
  std::vector<Eigen::VectorXd> modes;
};

struct NewtonReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  double max_linear_residual = 0.0;
  double solve_seconds = 0.0;
};

/// Nonlinear algebraic system of one dG(k) slab of the unfitted
/// Navier-Stokes problem. Unknowns are ordered mode-major (k + 1 copies of
/// the Taylor-Hood vector) followed by one pressure-gauge multiplier per
/// mode enforcing zero fluid mean of the pressure. Inactive dofs and, with
/// strong outer conditions, velocity dofs on the outer boundary are fixed to
/// zero by identity rows.
class SlabSystem {
 public:
  SlabSystem(const FormAssembler& forms, const DofActivity& activity, int k, bool convection = true);

  const FormAssembler& forms() const { return *forms_; }
  const TemporalBasis& basis() const { return basis_; }
  int spatial_size() const { return n_; }
  int size() const { return (basis_.size()) * (n_ + 1); }
  bool convection_enabled() const { return convection_; }
  const std::vector<char>& constrained() const { return constrained_; }

  SlabLoad load(const Slab& slab, const FlowData& data) const;
  Eigen::VectorXd residual(const Slab& slab, const Eigen::VectorXd& state, const Eigen::VectorXd& previous_trace,
                           const SlabLoad& load) const;
  SparseMatrix jacobian(const Slab& slab, const Eigen::VectorXd& state) const;

  /// Jump contribution l_b(0) M_j (U(0+) - U_prev) for all modes, mode-major.
  Eigen::VectorXd jump_residual(const Eigen::VectorXd& state, const Eigen::VectorXd& previous_trace) const;

  /// Spatial Taylor-Hood vector at reference time s (multipliers dropped).
  Eigen::VectorXd at(const Eigen::VectorXd& state, double s) const;
  /// Constant-in-time extension of a spatial vector, multipliers zero.
  Eigen::VectorXd constant_state(const Eigen::VectorXd& spatial) const;
  /// Zeroes constrained entries of a spatial vector.
  Eigen::VectorXd apply_constraints(Eigen::VectorXd spatial) const;

 private:
  const FormAssembler* forms_;
  TemporalBasis basis_;
  int n_;
  bool convection_;
  std::vector<char> constrained_;
  SparseMatrix stiffness_;
  SparseMatrix time_mass_;
  SparseMatrix jump_mass_;
  Eigen::VectorXd gauge_;
};

/// Newton iteration on one slab, starting from `state`. Stops when the
/// residual max-norm is below max(abs_tol, rel_tol * initial).
NewtonReport newton_solve_slab(const SlabSystem& system, const Slab& slab, const SlabLoad& load,
                               const Eigen::VectorXd& previous_trace, Eigen::VectorXd& state,
                               const NewtonSettings& settings);

struct SlabSolution {
  Slab slab;
  Eigen::VectorXd state;
  NewtonReport report;
};

struct Trajectory {
  int k = 0;
  std::vector<SlabSolution> slabs;
};

/// Solves M uniform slabs on (0, T] in sequence; the initial trace is the
/// Taylor-Hood vector `initial` (constrained entries are zeroed). Writes one
/// line per slab to `log` when given. Throws SlabFailure.
Trajectory advance(const SlabSystem& system, const FlowData& data, const Eigen::VectorXd& initial,
                   double final_time, int slabs, const NewtonSettings& settings, std::ostream* log = nullptr);

}  // namespace cutfem
