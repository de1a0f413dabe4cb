#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "curvem/solve_post.hpp"

namespace curvem {

using json = nlohmann::json;

inline constexpr const char* kMeshFormat = "curvem-mesh/1";
inline constexpr const char* kFieldFormat = "curvem-field/1";

namespace detail {

inline json point_json(const Point& p) { return json::array({p.x(), p.y()}); }

inline Point point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw MeshError(where + ": expected [x, y]");
  return Point(j[0].get<double>(), j[1].get<double>());
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw MeshError(where + ": missing '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return field(j, key, where).get<T>();
  } catch (const json::exception&) {
    throw MeshError(where + "." + key + ": wrong type");
  }
}

inline const char* tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::Robin: return "robin";
  }
  return "interior";
}

inline BoundaryTag tag_from(const std::string& s, const std::string& where) {
  if (s == "interior") return BoundaryTag::Interior;
  if (s == "dirichlet") return BoundaryTag::Dirichlet;
  if (s == "robin") return BoundaryTag::Robin;
  throw MeshError(where + ": unknown boundary tag '" + s + "'");
}

inline json curve_json(const CurveSegment& c) {
  json j = std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Line>) {
          return {{"type", "line"}, {"p0", point_json(s.p0)}, {"p1", point_json(s.p1)}};
        } else if constexpr (std::is_same_v<T, CircularArc>) {
          return {{"type", "arc"},
                  {"center", point_json(s.center)},
                  {"radius", s.radius},
                  {"theta0", s.theta0},
                  {"theta1", s.theta1}};
        } else if constexpr (std::is_same_v<T, BezierCubic>) {
          json ctrl = json::array();
          for (const auto& p : s.ctrl) ctrl.push_back(point_json(p));
          return {{"type", "bezier"}, {"ctrl", ctrl}};
        } else {
          return {{"type", "poly"}, {"x", s.x}, {"y", s.y}};
        }
      },
      c.shape());
  j["t0"] = c.t0();
  j["t1"] = c.t1();
  j["warp"] = c.warp() == Warp::Cubic ? "cubic" : "none";
  return j;
}

inline CurveSegment curve_from(const json& j, const std::string& where) {
  const std::string type = get<std::string>(j, "type", where);
  CurveSegment::Shape shape;
  if (type == "line") {
    shape = Line{point_from(field(j, "p0", where), where + ".p0"), point_from(field(j, "p1", where), where + ".p1")};
  } else if (type == "arc") {
    shape = CircularArc{point_from(field(j, "center", where), where + ".center"), get<double>(j, "radius", where),
                        get<double>(j, "theta0", where), get<double>(j, "theta1", where)};
    if (!(std::get<CircularArc>(shape).radius > 0.0)) throw MeshError(where + ": radius must be positive");
  } else if (type == "bezier") {
    const json& c = field(j, "ctrl", where);
    if (!c.is_array() || c.size() != 4) throw MeshError(where + ".ctrl: expected 4 points");
    BezierCubic b;
    for (int i = 0; i < 4; ++i) b.ctrl[i] = point_from(c[i], where + ".ctrl");
    shape = b;
  } else if (type == "poly") {
    shape = PolyParametric{get<std::vector<double>>(j, "x", where), get<std::vector<double>>(j, "y", where)};
  } else {
    throw MeshError(where + ": unknown curve type '" + type + "'");
  }
  const double t0 = j.value("t0", 0.0), t1 = j.value("t1", 1.0);
  const std::string warp = j.value("warp", std::string("none"));
  if (warp != "none" && warp != "cubic") throw MeshError(where + ": unknown warp '" + warp + "'");
  try {
    return CurveSegment(shape, t0, t1, warp == "cubic" ? Warp::Cubic : Warp::None);
  } catch (const GeometryError& e) {
    throw MeshError(where + ": " + e.what());
  }
}

}  // namespace detail

inline json mesh_to_json(const Mesh& m) {
  json j;
  j["format"] = kMeshFormat;
  j["vertices"] = json::array();
  for (const auto& v : m.vertices) j["vertices"].push_back(detail::point_json(v));
  j["curves"] = json::array();
  for (const auto& c : m.curves) j["curves"].push_back(detail::curve_json(c));
  j["edges"] = json::array();
  for (const auto& e : m.edges)
    j["edges"].push_back({{"v0", e.v0},
                          {"v1", e.v1},
                          {"curve", e.curve},
                          {"declared", e.is_curved_declared() ? "curved" : "straight"},
                          {"boundary", detail::tag_name(e.boundary)}});
  j["elements"] = json::array();
  for (const auto& E : m.elements) {
    json loop = json::array();
    for (const auto& le : E.loop) loop.push_back(json::array({le.edge, le.dir}));
    j["elements"].push_back({{"loop", loop}, {"region", E.region}});
  }
  j["kappa"] = json::object();
  for (auto [r, k] : m.kappa) j["kappa"][std::to_string(r)] = k;
  return j;
}

/// Parses, validates and finalizes a mesh.
inline Mesh mesh_from_json(const json& j, int curved_points = 32) {
  if (!j.is_object()) throw MeshError("mesh: expected a JSON object");
  const std::string fmt = j.value("format", std::string());
  if (fmt != kMeshFormat) throw MeshError("mesh: format must be '" + std::string(kMeshFormat) + "', got '" + fmt + "'");
  Mesh m;
  const auto arr = [&](const char* key) -> const json& {
    const json& a = detail::field(j, key, "mesh");
    if (!a.is_array()) throw MeshError(std::string("mesh.") + key + ": expected an array");
    return a;
  };
  const json& vs = arr("vertices");
  for (std::size_t i = 0; i < vs.size(); ++i) m.vertices.push_back(detail::point_from(vs[i], "vertices[" + std::to_string(i) + "]"));
  if (j.contains("curves")) {
    const json& cs = arr("curves");
    for (std::size_t i = 0; i < cs.size(); ++i) m.curves.push_back(detail::curve_from(cs[i], "curves[" + std::to_string(i) + "]"));
  }
  const json& es = arr("edges");
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string w = "edges[" + std::to_string(i) + "]";
    MeshEdge e;
    e.v0 = detail::get<int>(es[i], "v0", w);
    e.v1 = detail::get<int>(es[i], "v1", w);
    e.curve = es[i].value("curve", -1);
    const std::string d = es[i].value("declared", std::string("straight"));
    if (d != "straight" && d != "curved") throw MeshError(w + ": declared must be 'straight' or 'curved'");
    e.declared = d == "curved" ? Declared::Curved : Declared::Straight;
    e.boundary = detail::tag_from(es[i].value("boundary", std::string("interior")), w);
    m.edges.push_back(e);
  }
  const json& els = arr("elements");
  for (std::size_t i = 0; i < els.size(); ++i) {
    const std::string w = "elements[" + std::to_string(i) + "]";
    Element E;
    E.region = els[i].value("region", 0);
    const json& loop = detail::field(els[i], "loop", w);
    if (!loop.is_array()) throw MeshError(w + ".loop: expected an array");
    for (const auto& le : loop) {
      if (!le.is_array() || le.size() != 2) throw MeshError(w + ".loop: entries are [edge, dir]");
      E.loop.push_back({le[0].get<int>(), le[1].get<int>()});
    }
    m.elements.push_back(E);
  }
  if (j.contains("kappa")) {
    for (auto it = j["kappa"].begin(); it != j["kappa"].end(); ++it) {
      try {
        m.kappa[std::stoi(it.key())] = it.value().get<double>();
      } catch (const std::exception&) {
        throw MeshError("kappa: bad entry '" + it.key() + "'");
      }
    }
  } else {
    for (const auto& E : m.elements) m.kappa[E.region] = 1.0;
  }
  validate_topology(m);
  finalize_geometry(m, curved_points);
  return m;
}

inline void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << j.dump(1) << '\n';
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_mesh(const Mesh& m, const std::string& path) { write_json_file(mesh_to_json(m), path); }

inline Mesh read_mesh(const std::string& path) {
  try {
    return mesh_from_json(read_json_file(path));
  } catch (const MeshError& e) {
    throw MeshError(path + ": " + e.what());
  }
}

/// Per-element dump: boundary polygon samples and the Pi-nabla_k coefficients
/// in the element's scaled monomial basis.
inline json field_to_json(const SparseSystem& S, const Eigen::VectorXd& g, int per_curve = 16) {
  const Mesh& m = *S.mesh;
  json j;
  j["format"] = kFieldFormat;
  j["k"] = S.k;
  j["basis"] = "((x-xc)/h)^a ((y-yc)/h)^b ordered 1, x, y, x^2, xy, y^2, ...";
  j["elements"] = json::array();
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
    const LocalOperators& L = S.ops[el];
    json poly = json::array();
    for (const auto& p : boundary_samples(m, el, per_curve)) poly.push_back(detail::point_json(p));
    const Eigen::VectorXd c = L.project(S.local(g, el), S.psi());
    j["elements"].push_back({{"id", el},
                             {"region", m.elements[el].region},
                             {"center", detail::point_json(L.basis().center())},
                             {"h", L.basis().h()},
                             {"polygon", poly},
                             {"coeffs", std::vector<double>(c.data(), c.data() + c.size())}});
  }
  return j;
}

}  // namespace curvem
