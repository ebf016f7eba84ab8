#include "cutfem/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cutfem {

namespace {

constexpr double kPi = std::numbers::pi;

// Separable factors: A(s) = sin^2(pi s), B(s) = sin(pi s) cos(pi s), with
// derivatives up to second order.
struct Factors {
  double a, da, d2a;
  double b, db, d2b;
};

Factors factors(double s) {
  const double s2 = std::sin(2.0 * kPi * s);
  const double c2 = std::cos(2.0 * kPi * s);
  const double sn = std::sin(kPi * s);
  return {sn * sn, kPi * s2, 2.0 * kPi * kPi * c2, 0.5 * s2, kPi * c2, -2.0 * kPi * kPi * s2};
}

}  // namespace

ExactSolution::ExactSolution(double nu) : nu_(nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
}

ExactValues ExactSolution::eval(const Point& x, double t) const {
  const Factors fx = factors(x.x());
  const Factors fy = factors(x.y());
  const double st = std::sin(t);
  const double ct = std::cos(t);

  ExactValues e;
  // v1 = sin(t) A(x) B(y), v2 = -sin(t) B(x) A(y)
  e.velocity = st * Eigen::Vector2d(fx.a * fy.b, -fx.b * fy.a);
  e.dvdt = ct * Eigen::Vector2d(fx.a * fy.b, -fx.b * fy.a);
  e.grad_velocity << st * fx.da * fy.b, st * fx.a * fy.db,
                     -st * fx.db * fy.a, -st * fx.b * fy.da;
  e.laplacian = st * Eigen::Vector2d(fx.d2a * fy.b + fx.a * fy.d2b, -(fx.d2b * fy.a + fx.b * fy.d2a));
  e.pressure = st * fx.b * fy.b;
  e.grad_pressure = st * Eigen::Vector2d(fx.db * fy.b, fx.b * fy.db);
  return e;
}

Eigen::Vector2d ExactSolution::velocity(const Point& x, double t) const { return eval(x, t).velocity; }

double ExactSolution::pressure(const Point& x, double t) const { return eval(x, t).pressure; }

Eigen::Vector2d ExactSolution::source(const Point& x, double t) const {
  const ExactValues e = eval(x, t);
  return e.dvdt + e.grad_velocity * e.velocity - nu_ * e.laplacian + e.grad_pressure;
}

Eigen::Vector2d ExactSolution::boundary_data(const Point& x, double t, const RigidDisk& disk) const {
  constexpr double tol = 1e-10;
  if (std::abs(disk.signed_distance(x)) <= tol) return velocity(x, t);
  const double outer = std::min({x.x(), x.y(), 1.0 - x.x(), 1.0 - x.y()});
  if (std::abs(outer) <= tol) return Eigen::Vector2d::Zero();
  throw std::invalid_argument("boundary_data: point is not on the domain boundary");
}

}  // namespace cutfem
