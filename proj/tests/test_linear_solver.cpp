#include <gtest/gtest.h>

#include "cutfem/linear_solver.hpp"

using namespace cutfem;

namespace {
using SpMat = Eigen::SparseMatrix<double>;
}

TEST(LinearSolver, Identity) {
  SpMat a(5, 5);
  a.setIdentity();
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  const auto res = solve_linear(a, b);
  EXPECT_LE((res.x - b).norm(), 1e-15);
  EXPECT_LE(res.relative_residual, kLinearSolveTolerance);
}

TEST(LinearSolver, PoissonMatchesAnalyticInverse) {
  // tridiag(-1, 2, -1) has inverse min(i,j) (n + 1 - max(i,j)) / (n + 1), 1-based
  for (int n : {10, 200}) {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, 2.0);
      if (i > 0) t.emplace_back(i, i - 1, -1.0);
      if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
    }
    SpMat a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    const int col = n / 3;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[col] = 1.0;
    const auto res = solve_linear(a, b);
    for (int i = 0; i < n; ++i) {
      const int ii = i + 1, jj = col + 1;
      const double expected = std::min(ii, jj) * (n + 1.0 - std::max(ii, jj)) / (n + 1.0);
      EXPECT_NEAR(res.x[i], expected, n == 10 ? 1e-12 : 1e-11);
    }
  }
}

TEST(LinearSolver, NonsymmetricSystem) {
  SpMat a(3, 3);
  a.insert(0, 0) = 4.0;
  a.insert(0, 2) = 1.0;
  a.insert(1, 0) = -2.0;
  a.insert(1, 1) = 3.0;
  a.insert(2, 1) = 1.0;
  a.insert(2, 2) = 5.0;
  const Eigen::Vector3d x(1.0, -2.0, 0.5);
  const auto res = solve_linear(a, a * x);
  EXPECT_LE((res.x - x).norm(), 1e-14);
}

TEST(LinearSolver, ZeroRowIsReported) {
  SpMat a(3, 3);
  a.insert(0, 0) = 1.0;
  a.insert(0, 1) = 1.0;
  a.insert(2, 2) = 1.0;
  a.insert(1, 1) = 0.0;  // explicit zero counts as empty
  try {
    solve_linear(a, Eigen::Vector3d::Ones());
    FAIL() << "expected SingularSystemError";
  } catch (const SingularSystemError& e) {
    EXPECT_EQ(e.row(), 1);
  }
}

TEST(LinearSolver, NumericallySingularThrows) {
  SpMat a(2, 2);
  a.insert(0, 0) = 1.0;
  a.insert(0, 1) = 2.0;
  a.insert(1, 0) = 2.0;
  a.insert(1, 1) = 4.0;
  EXPECT_THROW(solve_linear(a, Eigen::Vector2d(1.0, 0.0)), SingularSystemError);
}

TEST(LinearSolver, DimensionMismatch) {
  SpMat a(2, 2);
  a.setIdentity();
  EXPECT_THROW(solve_linear(a, Eigen::Vector3d::Ones()), std::invalid_argument);
}
