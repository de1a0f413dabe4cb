#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "curvem/errors.hpp"

namespace curvem {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

struct Line {
  Point p0, p1;
};

/// Angle runs linearly from theta0 to theta1 over the parameter range (either direction).
struct CircularArc {
  Point center;
  double radius;
  double theta0, theta1;
};

struct BezierCubic {
  std::array<Point, 4> ctrl;
};

/// x(t) = sum_i x[i] t^i, y(t) = sum_i y[i] t^i, in the raw parameter t.
struct PolyParametric {
  std::vector<double> x, y;
};

/// Optional monotone reparametrization applied before evaluating the shape.
enum class Warp { None, Cubic };

/// A regular parametric curve piece x(t), t in [t0, t1].
///
/// Line, CircularArc and BezierCubic are parametrized on the normalized
/// u = (t - t0) / (t1 - t0); PolyParametric uses t itself. With Warp::Cubic the
/// user parameter t is first mapped to s = t0 + (t1 - t0) ((1 + u)^3 - 1) / 7,
/// which traces the same point set with a different speed.
class CurveSegment {
 public:
  using Shape = std::variant<Line, CircularArc, BezierCubic, PolyParametric>;

  CurveSegment() = default;
  CurveSegment(Shape shape, double t0 = 0.0, double t1 = 1.0, Warp warp = Warp::None)
      : shape_(std::move(shape)), t0_(t0), t1_(t1), warp_(warp) {
    if (!(t1_ > t0_)) throw GeometryError("CurveSegment: empty parameter range");
  }

  const Shape& shape() const { return shape_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  Warp warp() const { return warp_; }
  void set_warp(Warp w) { warp_ = w; }

  bool is_line() const { return std::holds_alternative<Line>(shape_); }

  Point eval(double t) const {
    check(t);
    double ds = 1.0;
    return eval_base(warped(t, ds));
  }

  /// dx/dt; not normalized.
  Vec2 tangent(double t) const {
    check(t);
    double ds = 1.0;
    const double s = warped(t, ds);
    return ds * tangent_base(s);
  }

  Point start() const { return eval(t0_); }
  Point end() const { return eval(t1_); }

 private:
  void check(double t) const {
    const double tol = 1e-14 * std::max(1.0, std::abs(t1_ - t0_));
    if (!(t >= t0_ - tol && t <= t1_ + tol))
      throw DomainError("curve parameter " + std::to_string(t) + " outside [" + std::to_string(t0_) + ", " +
                        std::to_string(t1_) + "]");
  }

  double warped(double t, double& ds) const {
    if (warp_ == Warp::None) {
      ds = 1.0;
      return t;
    }
    const double u = (t - t0_) / (t1_ - t0_);
    const double v = 1.0 + u;
    ds = 3.0 * v * v / 7.0;
    return t0_ + (t1_ - t0_) * (v * v * v - 1.0) / 7.0;
  }

  double unit(double s) const { return (s - t0_) / (t1_ - t0_); }

  Point eval_base(double s) const {
    return std::visit(
        [&](const auto& c) -> Point {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, Line>) {
            const double u = unit(s);
            return (1.0 - u) * c.p0 + u * c.p1;
          } else if constexpr (std::is_same_v<T, CircularArc>) {
            const double th = c.theta0 + (c.theta1 - c.theta0) * unit(s);
            return c.center + c.radius * Point(std::cos(th), std::sin(th));
          } else if constexpr (std::is_same_v<T, BezierCubic>) {
            const double u = unit(s), w = 1.0 - u;
            return w * w * w * c.ctrl[0] + 3.0 * w * w * u * c.ctrl[1] + 3.0 * w * u * u * c.ctrl[2] +
                   u * u * u * c.ctrl[3];
          } else {
            return Point(horner(c.x, s), horner(c.y, s));
          }
        },
        shape_);
  }

  Vec2 tangent_base(double s) const {
    const double du = 1.0 / (t1_ - t0_);
    return std::visit(
        [&](const auto& c) -> Vec2 {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, Line>) {
            return du * (c.p1 - c.p0);
          } else if constexpr (std::is_same_v<T, CircularArc>) {
            const double dth = (c.theta1 - c.theta0) * du;
            const double th = c.theta0 + (c.theta1 - c.theta0) * unit(s);
            return c.radius * dth * Vec2(-std::sin(th), std::cos(th));
          } else if constexpr (std::is_same_v<T, BezierCubic>) {
            const double u = unit(s), w = 1.0 - u;
            return du * 3.0 * (w * w * (c.ctrl[1] - c.ctrl[0]) + 2.0 * w * u * (c.ctrl[2] - c.ctrl[1]) +
                               u * u * (c.ctrl[3] - c.ctrl[2]));
          } else {
            return Vec2(dhorner(c.x, s), dhorner(c.y, s));
          }
        },
        shape_);
  }

  static double horner(const std::vector<double>& a, double t) {
    double r = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) r = r * t + *it;
    return r;
  }
  static double dhorner(const std::vector<double>& a, double t) {
    double r = 0.0;
    for (std::size_t i = a.size(); i-- > 1;) r = r * t + static_cast<double>(i) * a[i];
    return r;
  }

  Shape shape_{Line{Point::Zero(), Point::UnitX()}};
  double t0_ = 0.0, t1_ = 1.0;
  Warp warp_ = Warp::None;
};

inline Point curve_eval(const CurveSegment& c, double t) { return c.eval(t); }
inline Vec2 curve_tangent(const CurveSegment& c, double t) { return c.tangent(t); }

}  // namespace curvem
