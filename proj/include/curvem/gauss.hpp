#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "curvem/errors.hpp"

namespace curvem {

struct Rule1D {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

namespace detail {

// Legendre P_n(x) and its derivative via the three-term recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], exact for degree 2n-1.
inline Rule1D gauss_legendre(int n) {
  if (n < 1) throw ContractError("gauss_legendre: n must be >= 1");
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    detail::legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

/// Gauss-Legendre rule mapped to [a, b].
inline Rule1D gauss_legendre(int n, double a, double b) {
  Rule1D r = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    r.x[i] = mid + half * r.x[i];
    r.w[i] *= half;
  }
  return r;
}

/// The k-1 interior Gauss-Lobatto points of [0, 1] (roots of P_k'), ascending.
inline std::vector<double> lobatto_interior(int k) {
  std::vector<double> out;
  if (k < 2) return out;
  for (int j = 1; j < k; ++j) {
    double x = -std::cos(std::numbers::pi * j / k);
    for (int it = 0; it < 100; ++it) {
      double p = 0, dp = 0;
      detail::legendre(k, x, p, dp);
      // (1-x^2) P'' = 2x P' - k(k+1) P
      const double d2p = (2.0 * x * dp - k * (k + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (std::abs(x) < 1e-15) x = 0.0;
    out.push_back(0.5 * (1.0 + x));
  }
  return out;
}

}  // namespace curvem
