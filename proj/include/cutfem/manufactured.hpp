#pragma once

#include <Eigen/Core>

#include "cutfem/geometry.hpp"

namespace cutfem {

/// Point values of the manufactured Navier-Stokes solution on (0,1)^2 x [0,1]:
///
///   v = sin(t) [ sin^2(pi x) sin(pi y) cos(pi y), -sin(pi x) cos(pi x) sin^2(pi y) ]
///   p = sin(t) sin(pi x) cos(pi x) sin(pi y) cos(pi y)
///
/// The velocity is divergence free and vanishes on the boundary of the unit
/// square and at t = 0.
struct ExactValues {
  Eigen::Vector2d velocity;
  double pressure = 0.0;
  Eigen::Vector2d dvdt;
  Eigen::Matrix2d grad_velocity;  // row c holds grad of component c
  Eigen::Vector2d laplacian;
  Eigen::Vector2d grad_pressure;
};

class ExactSolution {
 public:
  explicit ExactSolution(double nu = 1.0);

  double viscosity() const { return nu_; }

  ExactValues eval(const Point& x, double t) const;
  Eigen::Vector2d velocity(const Point& x, double t) const;
  double pressure(const Point& x, double t) const;

  /// f = dv/dt + (v . grad) v - nu lap v + grad p.
  Eigen::Vector2d source(const Point& x, double t) const;

  /// Dirichlet data: the exact velocity on the disk boundary, zero on the
  /// outer boundary. Throws if x is on neither (tolerance 1e-10).
  Eigen::Vector2d boundary_data(const Point& x, double t, const RigidDisk& disk) const;

 private:
  double nu_;
};

}  // namespace cutfem
