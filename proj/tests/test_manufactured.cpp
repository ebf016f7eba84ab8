#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cutfem/manufactured.hpp"
#include "oracles.hpp"

using namespace cutfem;

TEST(Manufactured, DivergenceFree) {
  const ExactSolution ex;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const ExactValues v = ex.eval({u(rng), u(rng)}, u(rng));
    EXPECT_LE(std::abs(v.grad_velocity.trace()), 1e-13);
  }
}

TEST(Manufactured, SourceMatchesFiniteDifferences) {
  for (double nu : {1.0, 0.01}) {
    const ExactSolution ex(nu);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 200; ++i) {
      const Point x(u(rng), u(rng));
      const double t = u(rng);
      const Eigen::Vector2d f = ex.source(x, t);
      const Eigen::Vector2d fd = oracle::fd_source(ex, x, t);
      EXPECT_LE((f - fd).norm(), 1e-6 * std::max(1.0, f.norm())) << x.transpose() << " t=" << t;
    }
  }
}

TEST(Manufactured, VanishesOnSquareBoundaryAndAtTimeZero) {
  const ExactSolution ex;
  for (double s : {0.0, 0.3, 0.71, 1.0}) {
    for (const Point& x : {Point(s, 0.0), Point(s, 1.0), Point(0.0, s), Point(1.0, s)}) {
      EXPECT_LE(ex.velocity(x, 0.8).norm(), 1e-15);
    }
  }
  EXPECT_LE(ex.velocity({0.3, 0.6}, 0.0).norm(), 1e-15);
  EXPECT_EQ(ex.pressure({0.3, 0.6}, 0.0), 0.0);
}

TEST(Manufactured, BoundaryData) {
  const ExactSolution ex;
  const RigidDisk disk;
  const Point on_circle = disk.center + disk.radius * Point(std::cos(0.4), std::sin(0.4));
  EXPECT_LE((ex.boundary_data(on_circle, 0.7, disk) - ex.velocity(on_circle, 0.7)).norm(), 0.0);
  EXPECT_EQ(ex.boundary_data({0.0, 0.4}, 0.7, disk).norm(), 0.0);
  EXPECT_THROW(ex.boundary_data({0.3, 0.3}, 0.7, disk), std::invalid_argument);
}

TEST(Manufactured, StrongResidualOnTheCircle) {
  const ExactSolution ex(0.7);
  const RigidDisk disk;
  for (int i = 0; i < 16; ++i) {
    const double a = 2.0 * oracle::kPi * i / 16.0;
    const Point x = disk.center + disk.radius * Point(std::cos(a), std::sin(a));
    const ExactValues v = ex.eval(x, 0.6);
    const Eigen::Vector2d r =
        v.dvdt + v.grad_velocity * v.velocity - ex.viscosity() * v.laplacian + v.grad_pressure - ex.source(x, 0.6);
    EXPECT_LE(r.norm(), 1e-10);
  }
}

TEST(Manufactured, InnerBoundaryValue) {
  const ExactSolution ex;
  for (double t : {0.2, 1.0}) {
    EXPECT_EQ(ex.boundary_data({0.6, 0.5}, t, RigidDisk{}), ex.velocity({0.6, 0.5}, t));
  }
}
