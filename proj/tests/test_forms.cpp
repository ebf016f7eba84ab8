#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cutfem/forms.hpp"
#include "oracles.hpp"

using namespace cutfem;

namespace {

struct Fixture {
  explicit Fixture(int level, int r = 2, FormsConfig cfg = {}, double mult = 2.0)
      : mesh(level),
        geometry(mesh, RigidDisk{}, 2 * r + 2, 2 * r + 2),
        submesh(build_stabilization_submesh(mesh, RigidDisk{}, mult)),
        space(mesh, r),
        forms(space, geometry, submesh, cfg) {}
  BackgroundMesh mesh;
  CutGeometry geometry;
  StabilizationSubmesh submesh;
  TaylorHoodSpace space;
  FormAssembler forms;
};

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

double max_abs(const SparseMatrix& m) {
  double out = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

}  // namespace

TEST(Forms, DefaultNitscheParameters) {
  const auto p2 = NitscheParams::for_degree(2);
  EXPECT_DOUBLE_EQ(p2.gamma1, 80.0);
  EXPECT_DOUBLE_EQ(p2.gamma2, 8.0);
  const auto p3 = NitscheParams::for_degree(3);
  EXPECT_DOUBLE_EQ(p3.gamma1, 180.0);
  EXPECT_DOUBLE_EQ(p3.gamma2, 18.0);
}

TEST(Forms, GhostScalingWithViscosity) {
  const GhostPenaltyParams g{0.05, 0.1};
  EXPECT_DOUBLE_EQ(g.gamma_v(1.0, 0.5), 0.05 * 2.0 / 0.25);
  EXPECT_DOUBLE_EQ(g.gamma_v(0.1, 0.5), 0.05 * 10.1 / 0.25);
  EXPECT_DOUBLE_EQ(g.gamma_p(0.1), 1.0);
}

TEST(Forms, RejectsInvalidConfig) {
  FormsConfig c;
  c.nu = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.nitsche.gamma1 = -1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.ghost.gv_tilde = -0.1;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Forms, PressureGradientIsMinusDivergenceTranspose) {
  const Fixture f(1);
  const SparseMatrix b = f.forms.pressure_gradient();
  const SparseMatrix d = f.forms.divergence();
  EXPECT_LE(max_abs(b + SparseMatrix(d.transpose())), 1e-14);
  EXPECT_GT(max_abs(b), 1e-3);
}

TEST(Forms, ViscousKernelContainsConstants) {
  const Fixture f(1);
  const SparseMatrix a = f.forms.viscous();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(f.space.total_dofs());
  c.segment(f.space.ux_offset(), f.space.velocity_dofs()).setConstant(1.3);
  c.segment(f.space.uy_offset(), f.space.velocity_dofs()).setConstant(-0.4);
  EXPECT_LE((a * c).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE(max_abs(a - SparseMatrix(a.transpose())), 1e-14);
}

TEST(Forms, ViscousEnergyOfLinearField) {
  // v = (x, 0): nu (grad v, grad v) over the fluid = nu * fluid area
  FormsConfig cfg;
  cfg.nu = 0.3;
  const Fixture f(1, 2, cfg);
  const Eigen::VectorXd v = interpolate(
      f.space, [](const Point& x) { return Eigen::Vector2d(x.x(), 0.0); }, [](const Point&) { return 0.0; });
  EXPECT_NEAR(v.dot(f.forms.viscous() * v), 0.3 * f.geometry.fluid_area(), 1e-12);
}

TEST(Forms, GhostPenaltyVanishesOnGlobalPolynomials) {
  for (int level = 0; level <= 2; ++level) {
    for (int r = 2; r <= 3; ++r) {
      const Fixture f(level, r);
      const Eigen::VectorXd u = interpolate(
          f.space,
          [r](const Point& x) {
            return Eigen::Vector2d(std::pow(x.x(), r) * x.y() - x.y(), std::pow(x.y(), r) * std::pow(x.x(), r) + 2.0);
          },
          [r](const Point& x) { return std::pow(x.x() * x.y(), r - 1) - 3.0 * x.x(); });
      EXPECT_LE(f.forms.ghost_penalty_energy(u), 1e-18) << "level " << level << " r " << r;
    }
  }
}

TEST(Forms, GhostPenaltyIsSymmetricPositiveSemidefinite) {
  const Fixture f(2);
  const SparseMatrix s = f.forms.ghost_penalty();
  EXPECT_LE(max_abs(s - SparseMatrix(s.transpose())), 1e-12 * max_abs(s));
  for (unsigned i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = random_vector(f.space.total_dofs(), i);
    EXPECT_GE(x.dot(s * x), -1e-12 * max_abs(s) * x.squaredNorm());
  }
  EXPECT_GT(f.forms.ghost_penalty().nonZeros(), 0);
}

TEST(Forms, GhostEnergyMatchesMatrix) {
  const Fixture f(1, 3);
  const SparseMatrix s = f.forms.ghost_penalty();
  for (unsigned i = 0; i < 5; ++i) {
    const Eigen::VectorXd x = random_vector(f.space.total_dofs(), 40 + i);
    const double e = f.forms.ghost_penalty_energy(x);
    EXPECT_NEAR(e, x.dot(s * x), 1e-12 * e);
    EXPECT_GT(e, 0.0);
  }
}

TEST(Forms, GhostPenaltyOffGivesZeroMatrix) {
  FormsConfig cfg;
  cfg.ghost = {0.0, 0.0};
  const Fixture f(1, 2, cfg);
  EXPECT_EQ(f.forms.ghost_penalty().nonZeros(), 0);
}

TEST(Forms, OperatorBlockStructure) {
  // velocity block symmetric, velocity-pressure coupling antisymmetric
  const Fixture f(1);
  const SparseMatrix a = f.forms.linear_operator().total();
  const int nv = 2 * f.space.velocity_dofs();
  const int np = f.space.pressure_dofs();
  const Eigen::MatrixXd dense(a);
  const Eigen::MatrixXd avv = dense.topLeftCorner(nv, nv);
  const Eigen::MatrixXd avp = dense.topRightCorner(nv, np);
  const Eigen::MatrixXd apv = dense.bottomLeftCorner(np, nv);
  EXPECT_LE((avv - avv.transpose()).cwiseAbs().maxCoeff(), 1e-11 * avv.cwiseAbs().maxCoeff());
  EXPECT_LE((avp + apv.transpose()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Forms, NitscheConsistencyForDiskVelocity) {
  // The Nitsche terms applied to a velocity that equals its boundary data
  // reproduce the boundary load.
  const Fixture f(1);
  const auto g = [](const Point& x) { return Eigen::Vector2d(x.y() * x.y(), 1.0 - x.x()); };
  const Eigen::VectorXd v = interpolate(f.space, g, [](const Point&) { return 0.0; });
  const Eigen::VectorXd lhs = f.forms.nitsche_matrix() * v;
  const Eigen::VectorXd rhs = f.forms.nitsche_rhs(g);
  const int nv = 2 * f.space.velocity_dofs();
  // penalty and adjoint parts (velocity tests) match; consistency part is in lhs only
  const Eigen::VectorXd consistency = lhs - rhs;
  // consistency term: -nu (grad v n, psi) + (p n, psi) with p = 0; test with psi = 1 in x
  Eigen::VectorXd ones = Eigen::VectorXd::Zero(f.space.total_dofs());
  ones.head(f.space.velocity_dofs()).setOnes();
  double expected = 0.0;  // -\int_Gamma (grad v_x . n) = -\int 2 y n_y
  for (int id = 0; id < f.mesh.num_cells(); ++id) {
    const SurfaceRule& s = f.geometry.surface(CellId{id});
    for (std::size_t q = 0; q < s.points.size(); ++q) expected -= s.weights[q] * 2.0 * s.points[q].y() * s.normals[q].y();
  }
  EXPECT_NEAR(ones.head(nv).dot(consistency.head(nv)), expected, 1e-12);
  EXPECT_LE(consistency.tail(f.space.pressure_dofs()).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Forms, NitscheLoadVanishesForZeroData) {
  const Fixture f(1);
  const Eigen::VectorXd g = f.forms.nitsche_rhs([](const Point&) { return Eigen::Vector2d(0.0, 0.0); });
  EXPECT_EQ(g.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Forms, VolumeLoadSumsToFluidIntegral) {
  const Fixture f(1);
  const Eigen::VectorXd b = f.forms.volume_rhs([](const Point&) { return Eigen::Vector2d(1.0, -2.0); });
  const int nv = f.space.velocity_dofs();
  EXPECT_NEAR(b.segment(f.space.ux_offset(), nv).sum(), f.geometry.fluid_area(), 1e-13);
  EXPECT_NEAR(b.segment(f.space.uy_offset(), nv).sum(), -2.0 * f.geometry.fluid_area(), 1e-13);
  EXPECT_EQ(b.tail(f.space.pressure_dofs()).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Forms, MassMatricesAndPressureMean) {
  const Fixture f(1);
  const int nv = f.space.velocity_dofs();
  Eigen::VectorXd ones = Eigen::VectorXd::Zero(f.space.total_dofs());
  ones.head(nv).setOnes();
  EXPECT_NEAR(ones.dot(f.forms.fluid_mass() * ones), f.geometry.fluid_area(), 1e-13);
  EXPECT_NEAR(ones.dot(f.forms.jump_mass() * ones), 1.0, 1e-13);
  EXPECT_NEAR(f.forms.pressure_mean_functional().sum(), f.geometry.fluid_area(), 1e-13);
}

TEST(Forms, ConvectionOfKnownField) {
  // v = (x, -y): (v . grad) v = (x, y)
  const Fixture f(1);
  const Eigen::VectorXd v = interpolate(
      f.space, [](const Point& x) { return Eigen::Vector2d(x.x(), -x.y()); }, [](const Point&) { return 0.0; });
  const Eigen::VectorXd c = f.forms.convection(v, false).residual;
  const Eigen::VectorXd expected =
      f.forms.volume_rhs([](const Point& x) { return Eigen::Vector2d(x.x(), x.y()); });
  EXPECT_LE((c - expected).lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(Forms, ConvectionJacobianMatchesFiniteDifferences) {
  for (int level = 0; level <= 1; ++level) {
    const Fixture f(level);
    EXPECT_LE(oracle::convection_jacobian_error(f.forms, 10, 17u + level), 1e-5);
  }
}

TEST(Forms, CoordinateDump) {
  SparseMatrix m(2, 2);
  m.insert(1, 0) = 2.5;
  std::ostringstream os;
  FormAssembler::dump_coordinates(os, m);
  std::istringstream is(os.str());
  int i, j;
  double v;
  ASSERT_TRUE(is >> i >> j >> v);
  EXPECT_EQ(i, 1);
  EXPECT_EQ(j, 0);
  EXPECT_DOUBLE_EQ(v, 2.5);
}
