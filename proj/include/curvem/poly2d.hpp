#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "curvem/curve.hpp"
#include "curvem/errors.hpp"

namespace curvem {

/// Dimension of the polynomials of degree <= k in d variables (d = 1 or 2); P_{-1} = {0}.
constexpr int dim_pk(int k, int d = 2) {
  if (k < 0) return 0;
  return d == 1 ? k + 1 : (k + 1) * (k + 2) / 2;
}

struct MultiIndex {
  int a = 0, b = 0;
  int degree() const { return a + b; }
};

/// Monomials are ordered by total degree, then by decreasing power of x:
/// 1, x, y, x^2, xy, y^2, ...
constexpr int monomial_index(int a, int b) {
  const int d = a + b;
  return d * (d + 1) / 2 + b;
}

inline MultiIndex multi_index(int idx) {
  int d = 0;
  while ((d + 1) * (d + 2) / 2 <= idx) ++d;
  const int b = idx - d * (d + 1) / 2;
  return {d - b, b};
}

/// Table of integrals of xi^a eta^b with xi = (x - xc)/h, eta = (y - yc)/h.
struct MomentTable {
  int max_degree = 0;
  std::vector<double> values;  // indexed by monomial_index
  double operator()(int a, int b) const { return values.at(monomial_index(a, b)); }
};

/// m_alpha(x) = ((x - x_c) / h)^alpha for |alpha| <= degree.
class ScaledMonomialBasis {
 public:
  ScaledMonomialBasis(Point center, double h, int degree) : center_(std::move(center)), h_(h), degree_(degree) {
    if (!(h > 0.0)) throw ContractError("ScaledMonomialBasis: scale must be positive");
    if (degree < 0) throw ContractError("ScaledMonomialBasis: negative degree");
  }

  const Point& center() const { return center_; }
  double h() const { return h_; }
  int degree() const { return degree_; }
  int size() const { return dim_pk(degree_); }

  Eigen::VectorXd eval(const Point& x) const {
    const double xi = (x.x() - center_.x()) / h_, eta = (x.y() - center_.y()) / h_;
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) {
      const MultiIndex m = multi_index(i);
      v[i] = ipow(xi, m.a) * ipow(eta, m.b);
    }
    return v;
  }

  /// Row i holds the gradient of m_i.
  Eigen::MatrixX2d grad(const Point& x) const {
    const double xi = (x.x() - center_.x()) / h_, eta = (x.y() - center_.y()) / h_;
    Eigen::MatrixX2d g(size(), 2);
    for (int i = 0; i < size(); ++i) {
      const MultiIndex m = multi_index(i);
      g(i, 0) = m.a == 0 ? 0.0 : m.a * ipow(xi, m.a - 1) * ipow(eta, m.b) / h_;
      g(i, 1) = m.b == 0 ? 0.0 : m.b * ipow(xi, m.a) * ipow(eta, m.b - 1) / h_;
    }
    return g;
  }

  /// Coefficients of Laplacian(m_alpha) in the degree-(degree-2) sub-basis.
  Eigen::VectorXd laplacian_coeffs(int alpha) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim_pk(degree_ - 2));
    const MultiIndex m = multi_index(alpha);
    const double s = 1.0 / (h_ * h_);
    if (m.a >= 2) c[monomial_index(m.a - 2, m.b)] += s * m.a * (m.a - 1);
    if (m.b >= 2) c[monomial_index(m.a, m.b - 2)] += s * m.b * (m.b - 1);
    return c;
  }

  /// Matrix L (dim P_{k-2} x dim P_k) with column alpha = laplacian_coeffs(alpha).
  Eigen::MatrixXd laplacian_matrix() const {
    Eigen::MatrixXd L(dim_pk(degree_ - 2), size());
    for (int i = 0; i < size(); ++i) L.col(i) = laplacian_coeffs(i);
    return L;
  }

  /// Value of the polynomial with the given coefficients at x.
  double eval_poly(const Eigen::VectorXd& coeffs, const Point& x) const {
    return eval(x).head(coeffs.size()).dot(coeffs);
  }
  Vec2 grad_poly(const Eigen::VectorXd& coeffs, const Point& x) const {
    return grad(x).topRows(coeffs.size()).transpose() * coeffs;
  }

  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

 private:
  Point center_;
  double h_;
  int degree_;
};

/// Gram matrix of gradients, int_P grad m_a . grad m_b; needs moments up to 2k - 2.
inline Eigen::MatrixXd stiffness_gram(const MomentTable& mom, const ScaledMonomialBasis& B) {
  const int n = B.size();
  if (mom.max_degree < 2 * B.degree() - 2) throw ContractError("stiffness_gram: moment table too short");
  const double s = 1.0 / (B.h() * B.h());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const MultiIndex p = multi_index(i);
    for (int j = i; j < n; ++j) {
      const MultiIndex q = multi_index(j);
      double v = 0.0;
      if (p.a > 0 && q.a > 0) v += p.a * q.a * mom(p.a + q.a - 2, p.b + q.b);
      if (p.b > 0 && q.b > 0) v += p.b * q.b * mom(p.a + q.a, p.b + q.b - 2);
      G(i, j) = G(j, i) = s * v;
    }
  }
  return G;
}

/// int_P m_alpha m_beta for |alpha| <= k (rows) and |beta| <= s (columns).
inline Eigen::MatrixXd mass_moments(const MomentTable& mom, const ScaledMonomialBasis& B, int s) {
  const int n = B.size(), m = dim_pk(s);
  if (mom.max_degree < B.degree() + s) throw ContractError("mass_moments: moment table too short");
  Eigen::MatrixXd M(n, m);
  for (int i = 0; i < n; ++i) {
    const MultiIndex p = multi_index(i);
    for (int j = 0; j < m; ++j) {
      const MultiIndex q = multi_index(j);
      M(i, j) = mom(p.a + q.a, p.b + q.b);
    }
  }
  return M;
}

}  // namespace curvem
