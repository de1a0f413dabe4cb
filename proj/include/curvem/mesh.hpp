#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "curvem/curve.hpp"
#include "curvem/errors.hpp"

namespace curvem {

/// How an edge is declared, independently of its actual shape. A Curved
/// declaration admits straight geometry; a Straight one does not.
enum class Declared { Straight, Curved };

enum class BoundaryTag { Interior, Dirichlet, Robin };

struct MeshEdge {
  int v0 = -1, v1 = -1;  // v0 < v1 fixes the intrinsic direction
  int curve = -1;        // index into Mesh::curves, -1 for straight geometry
  Declared declared = Declared::Straight;
  BoundaryTag boundary = BoundaryTag::Interior;

  bool is_curved_declared() const { return declared == Declared::Curved; }
};

/// One entry of an element's counterclockwise edge loop; dir = +1 traverses v0 -> v1.
struct LoopEntry {
  int edge = -1;
  int dir = 1;
};

struct Element {
  std::vector<LoopEntry> loop;
  int region = 0;

  // Derived by finalize_geometry().
  double area = 0.0;
  double h = 0.0;  // diameter
  Point centroid = Point::Zero();
  Point star_center = Point::Zero();
  double rho_ratio = 0.0;       // radius of the star-shapedness ball / h
  double min_edge_ratio = 0.0;  // shortest edge length / h
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<CurveSegment> curves;
  std::vector<MeshEdge> edges;
  std::vector<Element> elements;
  std::map<int, double> kappa;  // region -> coefficient

  /// Geometry of an edge in its canonical direction (Line from v0 to v1 when straight).
  CurveSegment edge_geometry(int e) const {
    const MeshEdge& ed = edges.at(e);
    if (ed.curve >= 0) return curves.at(ed.curve);
    return CurveSegment(Line{vertices[ed.v0], vertices[ed.v1]});
  }

  bool edge_has_curve(int e) const { return edges.at(e).curve >= 0; }

  /// Vertex at which loop entry `pos` of element `el` starts.
  int loop_vertex(int el, int pos) const {
    const LoopEntry& le = elements[el].loop[pos];
    const MeshEdge& ed = edges[le.edge];
    return le.dir > 0 ? ed.v0 : ed.v1;
  }

  double kappa_of(int el) const {
    auto it = kappa.find(elements.at(el).region);
    if (it == kappa.end()) throw MeshError("no kappa for region " + std::to_string(elements.at(el).region));
    return it->second;
  }

  /// Position in the loop of the curved-declared edge, or -1.
  int curved_position(int el) const {
    const auto& loop = elements[el].loop;
    for (int p = 0; p < static_cast<int>(loop.size()); ++p)
      if (edges[loop[p].edge].is_curved_declared()) return p;
    return -1;
  }

  /// Elements adjacent to each edge (one or two entries).
  std::vector<std::vector<int>> edge_elements() const {
    std::vector<std::vector<int>> out(edges.size());
    for (int el = 0; el < static_cast<int>(elements.size()); ++el)
      for (const auto& le : elements[el].loop) out[le.edge].push_back(el);
    return out;
  }
};

/// Checks indices, canonical orientation, loop closure, the single-curved-edge
/// rule and boundary-tag consistency. Throws MeshError on the first violation.
inline void validate_topology(const Mesh& m) {
  const int nv = static_cast<int>(m.vertices.size());
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    const MeshEdge& ed = m.edges[e];
    const std::string tag = "edge " + std::to_string(e) + ": ";
    if (ed.v0 < 0 || ed.v1 < 0 || ed.v0 >= nv || ed.v1 >= nv) throw MeshError(tag + "vertex index out of range");
    if (!(ed.v0 < ed.v1)) throw MeshError(tag + "requires v0 < v1");
    if (ed.curve >= static_cast<int>(m.curves.size())) throw MeshError(tag + "curve index out of range");
    if (ed.declared == Declared::Straight && ed.curve >= 0 && !m.curves[ed.curve].is_line())
      throw MeshError(tag + "declared straight but has curved geometry");
    if (ed.curve >= 0) {
      const CurveSegment& c = m.curves[ed.curve];
      const Point a = m.vertices[ed.v0], b = m.vertices[ed.v1];
      const double scale = std::max(1.0, (b - a).norm());
      if ((c.start() - a).norm() > 1e-12 * scale || (c.end() - b).norm() > 1e-12 * scale)
        throw MeshError(tag + "curve endpoints do not match its vertices");
    }
  }
  std::vector<int> uses(m.edges.size(), 0), dirsum(m.edges.size(), 0);
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
    const auto& loop = m.elements[el].loop;
    const std::string tag = "element " + std::to_string(el) + ": ";
    if (loop.size() < 2) throw MeshError(tag + "needs at least two edges");
    int curved = 0;
    for (int p = 0; p < static_cast<int>(loop.size()); ++p) {
      const LoopEntry& le = loop[p];
      if (le.edge < 0 || le.edge >= static_cast<int>(m.edges.size())) throw MeshError(tag + "edge index out of range");
      if (le.dir != 1 && le.dir != -1) throw MeshError(tag + "loop direction must be +1 or -1");
      const MeshEdge& ed = m.edges[le.edge];
      const int end = le.dir > 0 ? ed.v1 : ed.v0;
      const int next = m.loop_vertex(el, (p + 1) % static_cast<int>(loop.size()));
      if (end != next) throw MeshError(tag + "edge loop is not closed");
      if (ed.is_curved_declared()) ++curved;
      ++uses[le.edge];
      dirsum[le.edge] += le.dir;
    }
    if (curved > 1) throw MeshError(tag + "more than one curved-declared edge");
    if (!m.kappa.contains(m.elements[el].region))
      throw MeshError(tag + "region " + std::to_string(m.elements[el].region) + " has no kappa");
  }
  for (auto [reg, k] : m.kappa)
    if (!(k > 0.0)) throw MeshError("kappa of region " + std::to_string(reg) + " must be positive");
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    const std::string tag = "edge " + std::to_string(e) + ": ";
    const bool bnd = m.edges[e].boundary != BoundaryTag::Interior;
    if (uses[e] == 0) throw MeshError(tag + "not used by any element");
    if (uses[e] > 2) throw MeshError(tag + "used by more than two elements");
    if (bnd && uses[e] != 1) throw MeshError(tag + "boundary-tagged edge must have exactly one element");
    if (!bnd && uses[e] != 2) throw MeshError(tag + "domain-boundary edge needs a Dirichlet or Robin tag");
    if (uses[e] == 2 && dirsum[e] != 0) throw MeshError(tag + "both elements traverse it in the same direction");
  }
}

}  // namespace curvem
