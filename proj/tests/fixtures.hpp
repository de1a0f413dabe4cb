#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "curvem/mesh_generators.hpp"

namespace curvem::testing {

enum class EdgeShape { Arc, Bezier, Poly, Chord };

/// One-element mesh on the polygon `pts` (counterclockwise); the edge from
/// pts[0] to pts[1] may carry a curve and a curved declaration.
inline Mesh single_element(const std::vector<Point>& pts, std::optional<CurveSegment> curve = std::nullopt,
                           Declared declared = Declared::Straight, BoundaryTag curved_tag = BoundaryTag::Robin) {
  Mesh m;
  m.vertices = pts;
  const int n = static_cast<int>(pts.size());
  Element E;
  for (int i = 0; i < n; ++i) {
    const int a = i, b = (i + 1) % n;
    MeshEdge ed;
    ed.v0 = std::min(a, b);
    ed.v1 = std::max(a, b);
    ed.boundary = BoundaryTag::Dirichlet;
    if (i == 0) {
      ed.declared = declared;
      ed.boundary = curved_tag;
      if (curve) {
        m.curves.push_back(*curve);
        ed.curve = 0;
      }
    }
    m.edges.push_back(ed);
    E.loop.push_back({i, a < b ? 1 : -1});
  }
  m.elements.push_back(E);
  m.kappa = {{0, 1.0}};
  validate_topology(m);
  finalize_geometry(m);
  return m;
}

/// Curve from p0 to p1 bulging by `s` times the chord length (s > 0: to the right
/// of p0 -> p1, i.e. outward for a counterclockwise element).
inline CurveSegment bulged_curve(const Point& p0, const Point& p1, double s, EdgeShape shape) {
  const Vec2 d = p1 - p0;
  const double c = d.norm();
  const Vec2 nr(d.y() / c, -d.x() / c);
  const Point mid = 0.5 * (p0 + p1);
  switch (shape) {
    case EdgeShape::Arc: {
      const double sag = std::abs(s) * c;
      const double R = (c * c / 4 + sag * sag) / (2 * sag);
      const Vec2 dir = s > 0 ? nr : Vec2(-nr);
      const Point ctr = mid + dir * (sag - R);
      const double t0 = std::atan2(p0.y() - ctr.y(), p0.x() - ctr.x());
      double dt = std::atan2(p1.y() - ctr.y(), p1.x() - ctr.x()) - t0;
      if (dt > std::numbers::pi) dt -= 2 * std::numbers::pi;
      if (dt < -std::numbers::pi) dt += 2 * std::numbers::pi;
      return CurveSegment(CircularArc{ctr, R, t0, t0 + dt});
    }
    case EdgeShape::Bezier: {
      const Vec2 off = (4.0 / 3.0) * s * c * nr;
      return CurveSegment(BezierCubic{{p0, p0 + d / 3 + off, p0 + 2 * d / 3 + 0.5 * off, p1}});
    }
    case EdgeShape::Poly: {
      // x(t) = p0 + d t + 4 s c nr t (1 - t) on t in [0, 1].
      const Vec2 q = 4 * s * c * nr;
      return CurveSegment(PolyParametric{{p0.x(), d.x() + q.x(), -q.x()}, {p0.y(), d.y() + q.y(), -q.y()}});
    }
    case EdgeShape::Chord: break;
  }
  return CurveSegment(Line{p0, p1});
}

/// Random star-shaped polygon (3 to 6 vertices) with a random curved first edge.
/// Retries until the element passes geometry finalization.
inline Mesh random_curved_element(std::mt19937_64& rng, BoundaryTag curved_tag = BoundaryTag::Robin,
                                  EdgeShape* shape_out = nullptr) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const int n = 3 + static_cast<int>(U(rng) * 4);
    const double scale = std::pow(10.0, -1.5 + 2.0 * U(rng));
    const Point shift(4 * U(rng) - 2, 4 * U(rng) - 2);
    std::vector<double> ang(n);
    for (int i = 0; i < n; ++i) ang[i] = 2 * std::numbers::pi * (i + 0.25 + 0.5 * U(rng)) / n;
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
      const double r = scale * (0.7 + 0.6 * U(rng));
      pts.push_back(shift + r * Point(std::cos(ang[i]), std::sin(ang[i])));
    }
    const EdgeShape shape = static_cast<EdgeShape>(static_cast<int>(U(rng) * 4) % 4);
    const double s = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + 0.2 * U(rng));
    if (shape_out) *shape_out = shape;
    try {
      if (shape == EdgeShape::Chord) return single_element(pts, std::nullopt, Declared::Curved, curved_tag);
      return single_element(pts, bulged_curve(pts[0], pts[1], s, shape), Declared::Curved, curved_tag);
    } catch (const MeshError&) {
    }
  }
}

}  // namespace curvem::testing
