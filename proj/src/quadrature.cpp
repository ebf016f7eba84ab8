#include "cutfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cutfem {

namespace {

// Legendre P_n and its derivative at x in [-1, 1].
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Rule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    // map from [-1,1] to [0,1], ascending order
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Rule1D gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: n must be >= 2");
  Rule1D rule;
  rule.points.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = n - 1;
  // interior nodes are the roots of P'_m
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    if (i != 0 && i != m) {
      for (int it = 0; it < 100; ++it) {
        // P'_m and P''_m from the Legendre ODE
        double p = 0.0, dp = 0.0;
        legendre(m, x, p, dp);
        const double d2p = (2.0 * x * dp - m * (m + 1) * p) / (1.0 - x * x);
        const double dx = dp / d2p;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    double p = 0.0, dp = 0.0;
    if (i == 0 || i == m) {
      p = (i == 0 && m % 2 == 1) ? -1.0 : 1.0;
    } else {
      legendre(m, x, p, dp);
    }
    rule.points[i] = 0.5 * (1.0 + x);
    rule.weights[i] = 1.0 / (m * (m + 1) * p * p);
  }
  rule.points.front() = 0.0;
  rule.points.back() = 1.0;
  return rule;
}

}  // namespace cutfem
