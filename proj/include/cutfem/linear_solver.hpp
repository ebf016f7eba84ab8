#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cutfem {

/// Raised for structurally or numerically singular systems.
class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, long row) : std::runtime_error(what), row_(row) {}
  /// Offending row, or -1 when the location is unknown.
  long row() const { return row_; }

 private:
  long row_;
};

struct LinearSolveResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;  // ||Ax - b|| / ||b||
};

/// Relative residual accepted by solve_linear.
inline constexpr double kLinearSolveTolerance = 1e-10;

/// Sparse direct solve (UMFPACK when available, Eigen::SparseLU otherwise),
/// with one step of iterative refinement when the residual check fails.
/// Throws SingularSystemError for empty rows/columns, failed factorizations
/// and residuals above kLinearSolveTolerance.
LinearSolveResult solve_linear(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b);

}  // namespace cutfem
