#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cutfem/config.hpp"
#include "cutfem/linear_solver.hpp"
#include "cutfem/study.hpp"

using namespace cutfem;

TEST(Eoc, TableValues) {
  const auto e = compute_eoc({1.514e-02, 3.764e-03});
  EXPECT_TRUE(std::isnan(e[0]));
  EXPECT_NEAR(e[1], 2.008, 5e-4);
  EXPECT_NEAR(compute_eoc({1.581e-03, 2.234e-04})[1], 2.823, 5e-4);
}

TEST(Eoc, GeometricSequence) {
  std::vector<double> errs;
  for (int l = 0; l < 6; ++l) errs.push_back(3.7 * std::pow(4.0, -l));
  const auto e = compute_eoc(errs);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_NEAR(e[i], 2.0, 1e-12);
}

TEST(Eoc, NonPositiveErrorIsUndefined) {
  const auto e = compute_eoc({1.0, 0.0, 0.5, -1.0, kUndefined});
  for (double v : e) EXPECT_TRUE(std::isnan(v));
}

namespace {

StudyConfig small_config() {
  StudyConfig c;
  c.levels = {0, 1};
  return c;
}

ErrorNorms error_of(const LevelSetup& s, const Trajectory& t, double pressure_shift) {
  const ExactSolution& ex = s.exact();
  return compute_l2l2_error(
      s.space(), s.error_geometry(), s.system().basis(), t, [&](const Point& x, double tt) { return ex.velocity(x, tt); },
      [&](const Point& x, double tt) { return ex.pressure(x, tt) + pressure_shift; });
}

}  // namespace

TEST(L2L2Error, SelfComparisonIsZero) {
  const StudyConfig c = small_config();
  const LevelSetup s(c, 1);
  const Trajectory t = interpolate_trajectory(s, c, 2);
  const auto& sp = s.space();
  auto field = [&](const Point& x, double tt, int block) {
    const auto& sol = t.slabs[tt < 0.5 ? 0 : 1];
    const Eigen::VectorXd u = s.system().at(sol.state, (tt - sol.slab.t0) / sol.slab.tau());
    const int off = block == 0 ? sp.ux_offset() : block == 1 ? sp.uy_offset() : sp.p_offset();
    const auto& space = block < 2 ? sp.velocity() : sp.pressure();
    return space.evaluate(u.segment(off, space.dof_count()), x);
  };
  const ErrorNorms e = compute_l2l2_error(
      sp, s.error_geometry(), s.system().basis(), t,
      [&](const Point& x, double tt) { return Eigen::Vector2d(field(x, tt, 0), field(x, tt, 1)); },
      [&](const Point& x, double tt) { return field(x, tt, 2); });
  EXPECT_LE(e.velocity, 1e-13);
  EXPECT_LE(e.pressure, 1e-13);
}

TEST(L2L2Error, PressureShiftDoesNotChangeError) {
  const StudyConfig c = small_config();
  const LevelSetup s(c, 1);
  Trajectory t;
  ASSERT_TRUE(run_level(c, 1, &t).ok);
  const ErrorNorms a = error_of(s, t, 0.0);
  const ErrorNorms b = error_of(s, t, 5.0);
  EXPECT_NEAR(a.pressure, b.pressure, 1e-12);
  EXPECT_EQ(a.velocity, b.velocity);
}

TEST(L2L2Error, InterpolantBeatsSolution) {
  const StudyConfig c = small_config();
  for (int level = 0; level <= 1; ++level) {
    const LevelSetup s(c, level);
    const ErrorNorms interp = error_of(s, interpolate_trajectory(s, c, c.slabs(level)), 0.0);
    const LevelResult solved = run_level(c, level);
    ASSERT_TRUE(solved.ok) << solved.failure;
    EXPECT_LT(interp.velocity, solved.ev) << "level " << level;
  }
}

TEST(L2L2Error, RejectsMismatchedTrajectory) {
  const StudyConfig c = small_config();
  const LevelSetup s0(c, 0), s1(c, 1);
  const Trajectory t = interpolate_trajectory(s0, c, 1);
  EXPECT_THROW(error_of(s1, t, 0.0), std::invalid_argument);
}

TEST(RunStudy, ErrorsDecreaseAndCsvRoundTrips) {
  StudyConfig c = small_config();
  c.levels = {0, 1, 2};
  const ErrorReport rep = run_study(c);
  ASSERT_TRUE(rep.all_ok());
  ASSERT_EQ(rep.levels.size(), 3u);
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    EXPECT_LT(rep.levels[i].ev, rep.levels[i - 1].ev);
    EXPECT_LT(rep.levels[i].ep, rep.levels[i - 1].ep);
    EXPECT_NEAR(rep.levels[i].tau, 0.5 * rep.levels[i - 1].tau, 1e-15);
    EXPECT_EQ(rep.levels[i].slabs, 1 << i);
  }
  EXPECT_EQ(rep.config_hash, c.hash());
  std::stringstream ss;
  write_csv(ss, rep);
  const ErrorReport back = read_csv(ss);
  ASSERT_EQ(back.levels.size(), rep.levels.size());
  EXPECT_EQ(back.k, rep.k);
  EXPECT_EQ(back.r, rep.r);
  EXPECT_EQ(back.radius_multiplier, rep.radius_multiplier);
  EXPECT_EQ(back.nu, rep.nu);
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const auto& a = rep.levels[i];
    const auto& b = back.levels[i];
    EXPECT_EQ(a.level, b.level);
    EXPECT_EQ(a.tau, b.tau);
    EXPECT_EQ(a.h, b.h);
    EXPECT_EQ(a.ev, b.ev);
    EXPECT_EQ(a.ep, b.ep);
    if (i == 0) {
      EXPECT_TRUE(std::isnan(b.eoc_v));
    } else {
      EXPECT_EQ(a.eoc_v, b.eoc_v);
      EXPECT_EQ(a.eoc_p, b.eoc_p);
    }
  }
}

TEST(RunStudy, ParallelLevelsMatchSequential) {
  StudyConfig c = small_config();
  const ErrorReport seq = run_study(c);
  c.jobs = 2;
  const ErrorReport par = run_study(c);
  for (std::size_t i = 0; i < seq.levels.size(); ++i) EXPECT_EQ(seq.levels[i].ev, par.levels[i].ev);
}

TEST(RunStudy, FailureIsRecordedPerLevel) {
  StudyConfig c = small_config();
  c.newton.max_iterations = 1;
  c.newton.abs_tol = 1e-30;
  c.newton.rel_tol = 1e-30;
  const ErrorReport rep = run_study(c);
  EXPECT_FALSE(rep.all_ok());
  ASSERT_EQ(rep.levels.size(), 2u);
  for (const auto& l : rep.levels) {
    EXPECT_FALSE(l.ok);
    EXPECT_NE(l.failure.find("Newton"), std::string::npos) << l.failure;
  }
}

TEST(Snapshot, GridValues) {
  const StudyConfig c = small_config();
  const LevelSetup s(c, 1);
  const Trajectory t = interpolate_trajectory(s, c, 2);
  std::stringstream ss;
  write_snapshot(ss, s, t, 5);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "x,y,fluid,vx,vy,p");
  int rows = 0, fluid = 0;
  while (std::getline(ss, line)) {
    ++rows;
    fluid += line.find(",1,") != std::string::npos;
  }
  EXPECT_EQ(rows, 25);
  EXPECT_EQ(fluid, 24);  // only the center lies in the disk
}

TEST(Config, ParsesFileAndFlags) {
  std::istringstream is(R"(# study
k = 2
r = 3
levels = 0..2   # inclusive
radius-mult = 1.0
outer-bc = nitsche
convection = off
)");
  StudyConfig c;
  read_config(is, c);
  EXPECT_EQ(c.k, 2);
  EXPECT_EQ(c.r, 3);
  EXPECT_EQ(c.levels, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(c.radius_multiplier, 1.0);
  EXPECT_EQ(c.outer, OuterBoundary::Nitsche);
  EXPECT_FALSE(c.convection);
  apply_setting(c, "levels", "1,3");
  EXPECT_EQ(c.levels, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.forms().nitsche.gamma1, 180.0);
  EXPECT_EQ(c.volume_degree(), 8);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsBadInput) {
  StudyConfig c;
  EXPECT_THROW(apply_setting(c, "bogus", "1"), std::invalid_argument);
  EXPECT_THROW(apply_setting(c, "k", "1.5"), std::invalid_argument);
  EXPECT_THROW(apply_setting(c, "nu", "abc"), std::invalid_argument);
  std::istringstream is("k 2\n");
  EXPECT_THROW(read_config(is, c), std::invalid_argument);
  c.levels = {1, 1};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.k = 3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.radius_multiplier = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.final_time = 0.3;
  EXPECT_THROW(c.slabs(0), std::invalid_argument);
}

TEST(Config, HashTracksSettings) {
  StudyConfig a, b;
  EXPECT_EQ(a.hash(), b.hash());
  b.gv = 0.1;
  EXPECT_NE(a.hash(), b.hash());
  b = a;
  b.output = "elsewhere.csv";  // outputs do not change the run
  EXPECT_EQ(a.hash(), b.hash());
  for (const auto& key : config_keys()) EXPECT_FALSE(key.empty());
}

namespace {

double slope(const std::vector<double>& v) {
  // mean log2 ratio between consecutive levels
  return std::log2(v.front() / v.back()) / (v.size() - 1.0);
}

}  // namespace

TEST(Consistency, DivergenceOfVelocityInterpolant) {
  const StudyConfig c;
  std::vector<double> norms;
  for (int level = 0; level <= 3; ++level) {
    const LevelSetup s(c, level);
    const Eigen::VectorXd u = s.interpolant(0.6);
    norms.push_back((s.forms().divergence() * u).lpNorm<Eigen::Infinity>());
    if (level > 0) { EXPECT_LT(norms[level], norms[level - 1]); }
  }
  EXPECT_GT(slope(norms), 2.0);
}

TEST(Consistency, NitscheSpatialResidualOfExactPair) {
  // steady residual at a fixed time with the time derivative moved into the load
  for (int r = 2; r <= 3; ++r) {
    StudyConfig c;
    c.r = r;
    c.k = r - 1;
    std::vector<double> norms;
    for (int level = 1; level <= 3; ++level) {
      const LevelSetup s(c, level);
      const double t = 0.6;
      const ExactSolution& ex = s.exact();
      const Eigen::VectorXd u = s.interpolant(t);
      Eigen::VectorXd res =
          s.forms().linear_operator().total() * u + s.forms().convection(u, false).residual -
          s.forms().volume_rhs([&](const Point& x) { return Eigen::Vector2d(ex.source(x, t) - ex.eval(x, t).dvdt); }) -
          s.forms().nitsche_rhs([&](const Point& x) { return ex.boundary_data(x, t, s.geometry().disk()); });
      // rows of strongly constrained outer-boundary dofs carry the boundary flux
      for (int i = 0; i < s.system().spatial_size(); ++i) {
        if (s.system().constrained()[i]) res[i] = 0.0;
      }
      norms.push_back(res.lpNorm<Eigen::Infinity>());
    }
    EXPECT_GE(slope(norms), r - 0.5) << "r=" << r;
  }
}

TEST(Consistency, SlabResidualOfSpaceTimeInterpolant) {
  const StudyConfig c;
  std::vector<double> norms;
  for (int level = 0; level <= 2; ++level) {
    const LevelSetup s(c, level);
    const Trajectory t = interpolate_trajectory(s, c, c.slabs(level));
    const auto& first = t.slabs.front();
    const SlabLoad load = s.system().load(first.slab, s.data());
    norms.push_back(
        s.system().residual(first.slab, first.state, s.interpolant(0.0), load).lpNorm<Eigen::Infinity>());
  }
  EXPECT_GT(slope(norms), 0.5);
  EXPECT_LT(norms[2], norms[1]);
}

TEST(RunStudy, NewtonIterationsAtLevelOne) {
  const LevelResult l = run_level(StudyConfig{}, 1);
  ASSERT_TRUE(l.ok) << l.failure;
  EXPECT_LE(l.max_newton_iterations, 6);
  EXPECT_EQ(static_cast<int>(l.log.size()), 2);
  EXPECT_LE(l.max_linear_residual, kLinearSolveTolerance);
}
