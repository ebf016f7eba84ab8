#include "cutfem/spacetime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cutfem/linear_solver.hpp"

namespace cutfem {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TemporalBasis::TemporalBasis(int k) : k_(k) {
  if (k < 0) throw std::invalid_argument("temporal degree must be >= 0");
  nodes_ = gauss_legendre(k + 1).points;
  denom_.assign(k + 1, 1.0);
  for (int i = 0; i <= k; ++i) {
    for (int m = 0; m <= k; ++m) {
      if (m != i) denom_[i] *= nodes_[i] - nodes_[m];
    }
  }
  quad_ = gauss_legendre(k + 2);

  const int n = k + 1;
  deriv_ = MatrixXd::Zero(n, n);
  mass_ = MatrixXd::Zero(n, n);
  std::vector<double> v(n), d(n);
  for (std::size_t q = 0; q < quad_.size(); ++q) {
    eval(quad_.points[q], v.data(), d.data());
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < n; ++a) {
        deriv_(b, a) += quad_.weights[q] * d[a] * v[b];
        mass_(b, a) += quad_.weights[q] * v[a] * v[b];
      }
    }
  }
  left_.resize(n);
  eval(0.0, v.data(), nullptr);
  for (int a = 0; a < n; ++a) left_[a] = v[a];
}

void TemporalBasis::eval(double s, double* values, double* derivatives) const {
  const int n = k_ + 1;
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    double d = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == i) continue;
      d = d * (s - nodes_[m]) + v;
      v *= s - nodes_[m];
    }
    values[i] = v / denom_[i];
    if (derivatives) derivatives[i] = d / denom_[i];
  }
}

std::vector<double> TemporalBasis::values(double s) const {
  std::vector<double> v(size());
  eval(s, v.data(), nullptr);
  return v;
}

std::vector<Slab> uniform_slabs(double final_time, int count) {
  if (count < 1 || !(final_time > 0.0)) throw std::invalid_argument("uniform_slabs: need count >= 1 and T > 0");
  std::vector<Slab> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({i, final_time * i / count, final_time * (i + 1) / count});
  }
  return out;
}

namespace {

void append_block(Triplets& t, const SparseMatrix& blk, int row0, int col0, const std::vector<char>* skip_rows) {
  for (int k = 0; k < blk.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(blk, k); it; ++it) {
      if (skip_rows && (*skip_rows)[it.row()]) continue;
      t.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()), it.value());
    }
  }
}

}  // namespace

SparseMatrix assemble_linear_slab_matrix(const TemporalBasis& basis, double tau, const LinearSlabOperators& ops) {
  const int n = static_cast<int>(ops.stiffness.rows());
  const int m = basis.size();
  const auto& d = basis.derivative_matrix();
  const auto& tm = basis.mass_matrix();
  const auto& l0 = basis.left_trace();
  Triplets t;
  for (int b = 0; b < m; ++b) {
    for (int a = 0; a < m; ++a) {
      const SparseMatrix blk = d(b, a) * ops.time_mass + (l0[b] * l0[a]) * ops.jump_mass + (tau * tm(b, a)) * ops.stiffness;
      append_block(t, blk, b * n, a * n, nullptr);
    }
  }
  SparseMatrix out(m * n, m * n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

VectorXd evaluate_in_time(const TemporalBasis& basis, const VectorXd& coeffs, int n, double s) {
  const auto l = basis.values(s);
  VectorXd out = VectorXd::Zero(n);
  for (int a = 0; a < basis.size(); ++a) out += l[a] * coeffs.segment(static_cast<Eigen::Index>(a) * n, n);
  return out;
}

OdeResult solve_scalar_ode(double lambda, double u0, double final_time, int slabs, int k) {
  const TemporalBasis basis(k);
  const int m = basis.size();
  LinearSlabOperators ops;
  ops.time_mass = SparseMatrix(1, 1);
  ops.time_mass.insert(0, 0) = 1.0;
  ops.jump_mass = ops.time_mass;
  ops.stiffness = SparseMatrix(1, 1);
  ops.stiffness.insert(0, 0) = -lambda;

  OdeResult res;
  double prev = u0;
  for (const Slab& slab : uniform_slabs(final_time, slabs)) {
    const SparseMatrix a = assemble_linear_slab_matrix(basis, slab.tau(), ops);
    // Solve for the increment over the constant extension of the previous
    // trace. The constant has no time derivative and no jump, so its residual
    // is the stiffness term alone; this keeps round-off relative to the
    // increment instead of the solution.
    VectorXd rhs(m);
    for (int b = 0; b < m; ++b) rhs[b] = lambda * slab.tau() * basis.mass_matrix().row(b).sum() * prev;
    const VectorXd u = VectorXd::Constant(m, prev) + solve_linear(a, rhs).x;
    for (int i = 0; i <= 20; ++i) {
      const double s = i / 20.0;
      const double uh = evaluate_in_time(basis, u, 1, s)[0];
      res.max_error = std::max(res.max_error, std::abs(uh - u0 * std::exp(lambda * slab.time(s))));
    }
    prev += evaluate_in_time(basis, u - VectorXd::Constant(m, prev), 1, 1.0)[0];
    res.end_values.push_back(prev);
  }
  res.endpoint_error = std::abs(prev - u0 * std::exp(lambda * final_time));
  return res;
}

void NewtonSettings::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iterations < 1) {
    throw std::invalid_argument("Newton tolerances must be positive and max_iterations >= 1");
  }
}

SlabSystem::SlabSystem(const FormAssembler& forms, const DofActivity& activity, int k, bool convection)
    : forms_(&forms), basis_(k), n_(forms.size()), convection_(convection) {
  if (static_cast<int>(activity.active.size()) != n_) throw std::invalid_argument("activity mask size mismatch");
  const auto& space = forms.space();
  constrained_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) constrained_[i] = !activity.is_active(i);
  if (forms.config().outer == OuterBoundary::Strong) {
    const auto& v = space.velocity();
    for (int d = 0; d < v.dof_count(); ++d) {
      if (!v.on_boundary(d)) continue;
      constrained_[space.ux_offset() + d] = 1;
      constrained_[space.uy_offset() + d] = 1;
    }
  }
  stiffness_ = forms.linear_operator().total();
  time_mass_ = forms.fluid_mass();
  jump_mass_ = forms.jump_mass();
  gauge_ = forms.pressure_mean_functional();
  for (int i = 0; i < n_; ++i) {
    if (constrained_[i]) gauge_[i] = 0.0;
  }
}

SlabLoad SlabSystem::load(const Slab& slab, const FlowData& data) const {
  const Rule1D& q = basis_.quadrature();
  SlabLoad out;
  out.modes.assign(basis_.size(), VectorXd::Zero(n_));
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double t = slab.time(q.points[i]);
    VectorXd f = VectorXd::Zero(n_);
    if (data.source) f += forms_->volume_rhs([&](const Point& x) { return data.source(x, t); });
    if (data.boundary) f += forms_->nitsche_rhs([&](const Point& x) { return data.boundary(x, t); });
    const auto l = basis_.values(q.points[i]);
    for (int b = 0; b < basis_.size(); ++b) out.modes[b] += (slab.tau() * q.weights[i] * l[b]) * f;
  }
  return out;
}

VectorXd SlabSystem::at(const VectorXd& state, double s) const {
  return evaluate_in_time(basis_, state.head(static_cast<Eigen::Index>(basis_.size()) * n_), n_, s);
}

VectorXd SlabSystem::constant_state(const VectorXd& spatial) const {
  VectorXd out = VectorXd::Zero(size());
  for (int a = 0; a < basis_.size(); ++a) out.segment(static_cast<Eigen::Index>(a) * n_, n_) = spatial;
  return out;
}

VectorXd SlabSystem::apply_constraints(VectorXd spatial) const {
  for (int i = 0; i < n_; ++i) {
    if (constrained_[i]) spatial[i] = 0.0;
  }
  return spatial;
}

VectorXd SlabSystem::jump_residual(const VectorXd& state, const VectorXd& previous_trace) const {
  const int m = basis_.size();
  const VectorXd jump = jump_mass_ * (at(state, 0.0) - previous_trace);
  VectorXd out(static_cast<Eigen::Index>(m) * n_);
  for (int b = 0; b < m; ++b) out.segment(static_cast<Eigen::Index>(b) * n_, n_) = basis_.left_trace()[b] * jump;
  return out;
}

VectorXd SlabSystem::residual(const Slab& slab, const VectorXd& state, const VectorXd& previous_trace,
                              const SlabLoad& load) const {
  if (state.size() != size()) throw std::invalid_argument("slab residual: state size mismatch");
  if (previous_trace.size() != n_) throw std::invalid_argument("slab residual: missing previous trace");
  const int m = basis_.size();
  const double tau = slab.tau();
  const auto& d = basis_.derivative_matrix();
  const auto& tm = basis_.mass_matrix();

  std::vector<VectorXd> mu(m), ku(m);
  for (int a = 0; a < m; ++a) {
    const auto ua = state.segment(static_cast<Eigen::Index>(a) * n_, n_);
    mu[a] = time_mass_ * ua;
    ku[a] = stiffness_ * ua;
  }
  VectorXd r = VectorXd::Zero(size());
  r.head(static_cast<Eigen::Index>(m) * n_) = jump_residual(state, previous_trace);
  for (int b = 0; b < m; ++b) {
    auto rb = r.segment(static_cast<Eigen::Index>(b) * n_, n_);
    for (int a = 0; a < m; ++a) rb += d(b, a) * mu[a] + (tau * tm(b, a)) * ku[a];
    rb -= load.modes[b];
    rb += state[static_cast<Eigen::Index>(m) * n_ + b] * gauge_;
  }
  if (convection_) {
    const Rule1D& q = basis_.quadrature();
    for (std::size_t i = 0; i < q.size(); ++i) {
      const VectorXd c = forms_->convection(at(state, q.points[i]), false).residual;
      const auto l = basis_.values(q.points[i]);
      for (int b = 0; b < m; ++b) r.segment(static_cast<Eigen::Index>(b) * n_, n_) += (tau * q.weights[i] * l[b]) * c;
    }
  }
  for (int b = 0; b < m; ++b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * n_;
    for (int i = 0; i < n_; ++i) {
      if (constrained_[i]) r[off + i] = state[off + i];
    }
    r[static_cast<Eigen::Index>(m) * n_ + b] = gauge_.dot(state.segment(off, n_));
  }
  return r;
}

SparseMatrix SlabSystem::jacobian(const Slab& slab, const VectorXd& state) const {
  const int m = basis_.size();
  const double tau = slab.tau();
  const auto& d = basis_.derivative_matrix();
  const auto& tm = basis_.mass_matrix();
  const auto& l0 = basis_.left_trace();
  const Rule1D& q = basis_.quadrature();

  std::vector<SparseMatrix> conv;
  std::vector<std::vector<double>> lq;
  if (convection_) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      conv.push_back(forms_->convection(at(state, q.points[i]), true).jacobian);
      lq.push_back(basis_.values(q.points[i]));
    }
  }

  Triplets t;
  for (int b = 0; b < m; ++b) {
    for (int a = 0; a < m; ++a) {
      SparseMatrix blk = d(b, a) * time_mass_ + (l0[b] * l0[a]) * jump_mass_ + (tau * tm(b, a)) * stiffness_;
      for (std::size_t i = 0; i < conv.size(); ++i) blk += (tau * q.weights[i] * lq[i][b] * lq[i][a]) * conv[i];
      append_block(t, blk, b * n_, a * n_, &constrained_);
    }
  }
  const int mult = m * n_;
  for (int b = 0; b < m; ++b) {
    for (int i = 0; i < n_; ++i) {
      if (constrained_[i]) t.emplace_back(b * n_ + i, b * n_ + i, 1.0);
      if (gauge_[i] != 0.0) {
        t.emplace_back(mult + b, b * n_ + i, gauge_[i]);
        t.emplace_back(b * n_ + i, mult + b, gauge_[i]);
      }
    }
  }
  SparseMatrix j(size(), size());
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

NewtonReport newton_solve_slab(const SlabSystem& system, const Slab& slab, const SlabLoad& load,
                               const VectorXd& previous_trace, VectorXd& state, const NewtonSettings& settings) {
  settings.validate();
  const auto start = std::chrono::steady_clock::now();
  NewtonReport rep;
  VectorXd r = system.residual(slab, state, previous_trace, load);
  rep.initial_residual = r.lpNorm<Eigen::Infinity>();
  rep.final_residual = rep.initial_residual;
  const double target = std::max(settings.abs_tol, settings.rel_tol * rep.initial_residual);
  while (rep.final_residual > target) {
    if (rep.iterations >= settings.max_iterations) {
      throw NewtonFailure(fmt::format("Newton did not converge in {} iterations (residual {:.3e})",
                                      settings.max_iterations, rep.final_residual),
                          rep.final_residual);
    }
    const LinearSolveResult lin = solve_linear(system.jacobian(slab, state), -r);
    rep.max_linear_residual = std::max(rep.max_linear_residual, lin.relative_residual);
    state += lin.x;
    ++rep.iterations;
    r = system.residual(slab, state, previous_trace, load);
    rep.final_residual = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(rep.final_residual)) throw NewtonFailure("Newton residual is not finite", rep.final_residual);
  }
  rep.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

Trajectory advance(const SlabSystem& system, const FlowData& data, const VectorXd& initial, double final_time,
                   int slabs, const NewtonSettings& settings, std::ostream* log) {
  if (initial.size() != system.spatial_size()) throw std::invalid_argument("advance: initial vector size mismatch");
  Trajectory traj;
  traj.k = system.basis().degree();
  VectorXd trace = system.apply_constraints(initial);
  for (const Slab& slab : uniform_slabs(final_time, slabs)) {
    SlabSolution sol;
    sol.slab = slab;
    try {
      sol.state = system.constant_state(trace);
      const SlabLoad load = system.load(slab, data);
      sol.report = newton_solve_slab(system, slab, load, trace, sol.state, settings);
    } catch (const std::exception& e) {
      throw SlabFailure(slab.index, e.what());
    }
    trace = system.at(sol.state, 1.0);
    if (log) {
      *log << fmt::format("slab {}, newton_iters {}, residual {:.3e}, solve_time {:.3f}s\n", slab.index,
                          sol.report.iterations, sol.report.final_residual, sol.report.solve_seconds);
    }
    traj.slabs.push_back(std::move(sol));
  }
  return traj;
}

}  // namespace cutfem
