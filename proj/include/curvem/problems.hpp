#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "curvem/solve_post.hpp"

namespace curvem {

/// Closed-form data of -div(kappa grad u) = f with region-wise kappa.
struct BuiltinProblem {
  std::string name;
  std::map<int, double> kappa;
  std::function<double(const Point&, int)> u, f;
  std::function<Vec2(const Point&, int)> grad;
  double rho = 0.0;
  int boundary_region = 0;

  double kappa_at(int region) const {
    auto it = kappa.find(region);
    if (it == kappa.end()) throw ConfigError("problem " + name + " has no kappa for region " + std::to_string(region));
    return it->second;
  }

  /// Installs this problem's coefficients on the mesh.
  void apply(Mesh& m) const {
    for (const auto& E : m.elements) kappa_at(E.region);
    m.kappa = kappa;
  }

  ProblemData data() const {
    ProblemData d;
    d.f = f;
    const int br = boundary_region;
    auto uu = u;
    d.g_D = [uu, br](const Point& x) { return uu(x, br); };
    auto self = *this;
    d.g_R = [self](const Point& x, const Vec2& n, int region) {
      return self.kappa_at(region) * self.grad(x, region).dot(n) + self.rho * self.u(x, region);
    };
    const double r = rho;
    d.rho = [r](const Point&) { return r; };
    return d;
  }

  ExactSolution exact() const { return {u, grad}; }
};

/// A full polynomial of degree k with fixed coefficients.
inline BuiltinProblem patch_problem(int k) {
  if (k < 1 || k > 3) throw ConfigError("patch problem: k must be in {1,2,3}");
  // Coefficients in the order 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3.
  static const double C[10] = {0.5, 1.0, 2.0, 0.7, -0.4, 0.3, 1.0, 0.25, -3.0, 0.6};
  const int n = dim_pk(k);
  BuiltinProblem p;
  p.name = "patch";
  p.kappa = {{0, 1.0}, {1, 1.0}};
  p.rho = 1.0;
  p.u = [n](const Point& x, int) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const MultiIndex a = multi_index(i);
      s += C[i] * ScaledMonomialBasis::ipow(x.x(), a.a) * ScaledMonomialBasis::ipow(x.y(), a.b);
    }
    return s;
  };
  p.grad = [n](const Point& x, int) {
    Vec2 g = Vec2::Zero();
    for (int i = 0; i < n; ++i) {
      const MultiIndex a = multi_index(i);
      if (a.a > 0) g.x() += C[i] * a.a * ScaledMonomialBasis::ipow(x.x(), a.a - 1) * ScaledMonomialBasis::ipow(x.y(), a.b);
      if (a.b > 0) g.y() += C[i] * a.b * ScaledMonomialBasis::ipow(x.x(), a.a) * ScaledMonomialBasis::ipow(x.y(), a.b - 1);
    }
    return g;
  };
  p.f = [n](const Point& x, int) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const MultiIndex a = multi_index(i);
      if (a.a > 1) s -= C[i] * a.a * (a.a - 1) * ScaledMonomialBasis::ipow(x.x(), a.a - 2) * ScaledMonomialBasis::ipow(x.y(), a.b);
      if (a.b > 1) s -= C[i] * a.b * (a.b - 1) * ScaledMonomialBasis::ipow(x.x(), a.a) * ScaledMonomialBasis::ipow(x.y(), a.b - 2);
    }
    return s;
  };
  return p;
}

/// Radial solution across a circle of radius R centred at (1/2, 1/2):
/// u = a r^2 inside (region 1), u = b r^2 + c ln r^2 + d outside (region 0),
/// with value and flux continuity.
inline BuiltinProblem interface_jump_problem(double R = 0.3, double k_out = 1.0, double k_in = 100.0) {
  const double a = 1.0, b = 1.0;
  const double c = R * R * (k_in * a - k_out * b) / k_out;
  const double d = a * R * R - b * R * R - c * std::log(R * R);
  const Point o(0.5, 0.5);
  BuiltinProblem p;
  p.name = "interface-jump";
  p.kappa = {{0, k_out}, {1, k_in}};
  p.u = [=](const Point& x, int region) {
    const double r2 = (x - o).squaredNorm();
    return region == 1 ? a * r2 : b * r2 + c * std::log(r2) + d;
  };
  p.grad = [=](const Point& x, int region) -> Vec2 {
    const Vec2 y = x - o;
    return region == 1 ? Vec2(2.0 * a * y) : Vec2((2.0 * b + 2.0 * c / y.squaredNorm()) * y);
  };
  p.f = [=](const Point&, int region) { return region == 1 ? -4.0 * k_in * a : -4.0 * k_out * b; };
  return p;
}

/// u = sin(x) cos(y) with unit coefficient everywhere.
inline BuiltinProblem smooth_problem() {
  BuiltinProblem p;
  p.name = "smooth";
  p.kappa = {{0, 1.0}, {1, 1.0}};
  p.u = [](const Point& x, int) { return std::sin(x.x()) * std::cos(x.y()); };
  p.grad = [](const Point& x, int) {
    return Vec2(std::cos(x.x()) * std::cos(x.y()), -std::sin(x.x()) * std::sin(x.y()));
  };
  p.f = [](const Point& x, int) { return 2.0 * std::sin(x.x()) * std::cos(x.y()); };
  return p;
}

/// u = sin(2x) cos(y) + xy on the unit disk; rho is the Robin coefficient.
inline BuiltinProblem disk_problem(const std::string& name, double rho) {
  BuiltinProblem p;
  p.name = name;
  p.kappa = {{0, 1.0}};
  p.rho = rho;
  p.u = [](const Point& x, int) { return std::sin(2.0 * x.x()) * std::cos(x.y()) + x.x() * x.y(); };
  p.grad = [](const Point& x, int) {
    return Vec2(2.0 * std::cos(2.0 * x.x()) * std::cos(x.y()) + x.y(),
                -std::sin(2.0 * x.x()) * std::sin(x.y()) + x.x());
  };
  p.f = [](const Point& x, int) { return 5.0 * std::sin(2.0 * x.x()) * std::cos(x.y()); };
  return p;
}

inline const std::vector<std::string>& builtin_problem_names() {
  static const std::vector<std::string> names{"patch",         "interface-jump", "smooth",
                                              "dirichlet-disk", "robin-disk",     "neumann-disk"};
  return names;
}

inline BuiltinProblem builtin_problem(const std::string& name, int k = 1) {
  if (name == "patch") return patch_problem(k);
  if (name == "interface-jump") return interface_jump_problem();
  if (name == "smooth") return smooth_problem();
  if (name == "dirichlet-disk") return disk_problem(name, 0.0);
  if (name == "robin-disk") return disk_problem(name, 1.0);
  if (name == "neumann-disk") return disk_problem(name, 0.0);
  throw ConfigError("unknown problem '" + name + "'");
}

}  // namespace curvem
