#include "cutfem/linear_solver.hpp"

#include <cmath>
#include <vector>

#ifdef CUTFEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#endif

namespace cutfem {

namespace {

void check_structure(const Eigen::SparseMatrix<double>& a) {
  std::vector<char> row_has(a.rows(), 0);
  for (int k = 0; k < a.outerSize(); ++k) {
    bool col_has = false;
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      if (it.value() != 0.0) {
        row_has[it.row()] = 1;
        col_has = true;
      }
    }
    if (!col_has) throw SingularSystemError("structurally singular: column " + std::to_string(k) + " is zero", -1);
  }
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    if (!row_has[r]) throw SingularSystemError("structurally singular: row " + std::to_string(r) + " is zero", r);
  }
}

}  // namespace

LinearSolveResult solve_linear(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
  check_structure(a);

  Eigen::SparseMatrix<double> mat = a;
  mat.makeCompressed();
#ifdef CUTFEM_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
  // the slab systems are structurally near-symmetric; the default strategy
  // orders the dense pressure-gauge rows badly
  lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
#else
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
  lu.compute(mat);
  if (lu.info() != Eigen::Success) {
#ifdef CUTFEM_HAVE_UMFPACK
    throw SingularSystemError("factorization failed (numerically singular)", -1);
#else
    throw SingularSystemError("factorization failed: " + lu.lastErrorMessage(), -1);
#endif
  }

  LinearSolveResult res;
  res.x = lu.solve(b);
  const double bnorm = b.norm();
  auto relres = [&](const Eigen::VectorXd& x) {
    const double r = (mat * x - b).norm();
    return bnorm > 0.0 ? r / bnorm : r;
  };
  res.relative_residual = relres(res.x);
  if (!(res.relative_residual <= kLinearSolveTolerance) && std::isfinite(res.relative_residual)) {
    const Eigen::VectorXd dx = lu.solve(Eigen::VectorXd(b - mat * res.x));
    res.x += dx;
    res.relative_residual = relres(res.x);
  }
  if (!(res.relative_residual <= kLinearSolveTolerance)) {
    throw SingularSystemError("direct solve residual " + std::to_string(res.relative_residual) +
                                  " above tolerance (numerically singular system)",
                              -1);
  }
  return res;
}

}  // namespace cutfem
