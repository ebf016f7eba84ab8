#pragma once

#include <vector>

namespace cutfem {

/// One-dimensional quadrature rule on the unit interval [0, 1].
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre rule with n points on [0, 1]; exact for degree 2n - 1.
Rule1D gauss_legendre(int n);

/// Gauss-Lobatto rule with n >= 2 points on [0, 1] (endpoints included).
Rule1D gauss_lobatto(int n);

/// Number of Gauss-Legendre points needed to integrate degree `degree` exactly.
inline int gauss_points_for_degree(int degree) { return degree / 2 + 1; }

}  // namespace cutfem
