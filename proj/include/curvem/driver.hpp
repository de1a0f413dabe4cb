#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "curvem/mesh_generators.hpp"
#include "curvem/mesh_io.hpp"
#include "curvem/problems.hpp"

namespace curvem {

/// Parameters shared by the command-line commands. Loadable from a JSON file
/// with a "version" key; every key mirrors a field name.
struct RunConfig {
  int version = 1;
  std::vector<int> k{1, 2, 3};
  std::string mesh_file;
  std::string generator;  // empty: chosen from the problem
  int n = 4;
  std::vector<int> levels{4, 8, 16, 32};
  double radius = 0.3;
  std::string boundary;  // empty: chosen from the problem
  std::string arc = "arc";
  bool reparametrize = false;
  std::string problem = "interface-jump";
  int curved_points = 0;
  int interior_order = 0;
  std::string ownership = "smaller-id";
  std::string solver = "direct";
  int threads = 1;
  double tgp_corruption = 0.0;
  double tolerance = 1e-8;
  double rate_slack = -1.0;  // >= 0: convergence fails when the finest rate is below k - slack
  std::string output;
  std::string matrix_output;
};

inline void validate(const RunConfig& c) {
  if (c.version != 1) throw ConfigError("config version must be 1");
  if (c.k.empty()) throw ConfigError("k list is empty");
  for (int k : c.k)
    if (k < 1 || k > 3) throw ConfigError("k must be in {1,2,3}, got " + std::to_string(k));
  if (c.n <= 0) throw ConfigError("n must be positive");
  for (int n : c.levels)
    if (n <= 0) throw ConfigError("levels must be positive");
  if (!(c.radius > 0.0)) throw ConfigError("radius must be positive");
  if (!c.mesh_file.empty() && !std::filesystem::exists(c.mesh_file))
    throw ConfigError("mesh file not found: " + c.mesh_file);
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.curved_points < 0 || c.interior_order < 0) throw ConfigError("quadrature overrides must be non-negative");
  if (c.ownership != "smaller-id" && c.ownership != "larger-kappa" && c.ownership != "two-sided")
    throw ConfigError("ownership must be smaller-id, larger-kappa or two-sided");
  if (c.solver != "direct" && c.solver != "cg") throw ConfigError("solver must be direct or cg");
}

inline RunConfig config_from_json(const json& j, RunConfig c = {}) {
  static const std::set<std::string> known{
      "version", "k", "mesh_file", "generator", "n", "levels", "radius", "boundary", "arc", "reparametrize",
      "problem", "curved_points", "interior_order", "ownership", "solver", "threads", "tgp_corruption",
      "tolerance", "rate_slack", "output", "matrix_output"};
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("version")) throw ConfigError("config: missing 'version'");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw ConfigError("config: unknown key '" + it.key() + "'");
  const auto set = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      if constexpr (std::is_same_v<std::decay_t<decltype(dst)>, std::vector<int>>) {
        dst = j[key].is_array() ? j[key].get<std::vector<int>>() : std::vector<int>{j[key].get<int>()};
      } else {
        dst = j[key].get<std::decay_t<decltype(dst)>>();
      }
    } catch (const json::exception&) {
      throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
  };
  set("version", c.version);
  set("k", c.k);
  set("mesh_file", c.mesh_file);
  set("generator", c.generator);
  set("n", c.n);
  set("levels", c.levels);
  set("radius", c.radius);
  set("boundary", c.boundary);
  set("arc", c.arc);
  set("reparametrize", c.reparametrize);
  set("problem", c.problem);
  set("curved_points", c.curved_points);
  set("interior_order", c.interior_order);
  set("ownership", c.ownership);
  set("solver", c.solver);
  set("threads", c.threads);
  set("tgp_corruption", c.tgp_corruption);
  set("tolerance", c.tolerance);
  set("rate_slack", c.rate_slack);
  set("output", c.output);
  set("matrix_output", c.matrix_output);
  return c;
}

inline RunConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

inline OwnershipPolicy ownership_policy(const std::string& s) {
  if (s == "larger-kappa") return OwnershipPolicy::LargerKappa;
  if (s == "two-sided") return OwnershipPolicy::TwoSided;
  return OwnershipPolicy::SmallerId;
}

inline std::string default_generator(const std::string& problem) {
  return problem.ends_with("-disk") ? "disk-boundary" : "square-circle-interface";
}

inline std::string default_boundary(const std::string& problem) {
  if (problem == "robin-disk") return "robin";
  if (problem == "neumann-disk" || problem == "patch") return "mixed";
  return "dirichlet";
}

/// Mesh of refinement n from the config (a file ignores n).
inline Mesh make_mesh(const RunConfig& c, int n) {
  Mesh m;
  if (!c.mesh_file.empty()) {
    m = read_mesh(c.mesh_file);
  } else {
    const std::string gen = c.generator.empty() ? default_generator(c.problem) : c.generator;
    const BoundaryMode bm = parse_boundary_mode(c.boundary.empty() ? default_boundary(c.problem) : c.boundary);
    const ArcMode am = parse_arc_mode(c.arc);
    if (gen == "square-circle-interface")
      m = square_circle_interface(n, c.radius, {am, bm});
    else if (gen == "disk-boundary")
      m = disk_boundary(n, bm, am);
    else if (gen == "square-straight")
      m = square_straight(n, bm);
    else
      throw ConfigError("unknown generator '" + gen + "' (square-circle-interface, disk-boundary, square-straight)");
  }
  if (c.reparametrize) reparametrize_curves(m);
  return m;
}

inline AssemblyOptions assembly_options(const RunConfig& c, int k) {
  AssemblyOptions a;
  a.element.k = k;
  a.element.curved_points = c.curved_points;
  a.element.interior_order = c.interior_order;
  a.element.tgp_corruption = c.tgp_corruption;
  a.policy = ownership_policy(c.ownership);
  a.threads = c.threads;
  return a;
}

inline SolverKind solver_kind(const RunConfig& c) { return c.solver == "cg" ? SolverKind::CG : SolverKind::Direct; }

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

/// Exit codes of the commands.
enum Exit { kPass = 0, kToleranceFailure = 1, kInputError = 2 };

/// Polynomial solutions of each degree on the curved-interface mesh.
inline int cmd_patch_test(const RunConfig& c, std::ostream& out) {
  validate(c);
  double worst = 0.0;
  for (int k : c.k) {
    const BuiltinProblem p = patch_problem(k);
    RunConfig ck = c;
    ck.problem = "patch";
    Mesh m = make_mesh(ck, c.n);
    p.apply(m);
    const SparseSystem S = assemble(m, p.data(), assembly_options(c, k));
    const SolveReport sr = solve_spd(S, solver_kind(c));
    const ErrorReport er = error_norms(S, sr.g, p.exact());
    const bool ok = er.e_H1 <= c.tolerance;
    out << "patch-test k=" << k << " elements=" << m.elements.size() << " ndof=" << S.free.size()
        << " e_H1=" << fmt(er.e_H1) << " e_L2=" << fmt(er.e_L2) << " residual=" << fmt(sr.rel_residual) << ' '
        << (ok ? "PASS" : "FAIL") << '\n';
    worst = std::max(worst, er.e_H1);
  }
  out << "max e_H1=" << fmt(worst) << " tolerance=" << fmt(c.tolerance) << '\n';
  return worst <= c.tolerance ? kPass : kToleranceFailure;
}

inline int cmd_convergence(const RunConfig& c, std::ostream& out) {
  validate(c);
  const BuiltinProblem p = builtin_problem(c.problem, c.k.front());
  if (c.problem == "patch" && c.k.size() > 1) throw ConfigError("patch convergence takes a single k");
  StudyOptions so;
  so.assembly = assembly_options(c, c.k.front());
  so.solver = solver_kind(c);
  const auto family = [&](int n) {
    Mesh m = make_mesh(c, n);
    p.apply(m);
    return m;
  };
  const auto rows = convergence_study(family, c.levels, p.data(), p.exact(), c.k, so);
  const std::string csv = rates_csv(rows);
  if (c.output.empty()) {
    out << csv;
  } else {
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + c.output + " for writing");
    f << csv;
    out << "wrote " << rows.size() << " rows to " << c.output << '\n';
  }
  int status = kPass;
  if (c.rate_slack >= 0.0)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool last = i + 1 == rows.size() || rows[i + 1].k != rows[i].k;
      if (last && !(rows[i].rate_H1 >= rows[i].k - c.rate_slack)) {
        out << "rate check failed for k=" << rows[i].k << ": " << rows[i].rate_H1 << '\n';
        status = kToleranceFailure;
      }
    }
  return status;
}

inline int cmd_solve(const RunConfig& c, std::ostream& out) {
  validate(c);
  const int k = c.k.front();
  const BuiltinProblem p = builtin_problem(c.problem, k);
  Mesh m = make_mesh(c, c.n);
  p.apply(m);
  const SparseSystem S = assemble(m, p.data(), assembly_options(c, k));
  const SolveReport sr = solve_spd(S, solver_kind(c));
  const ErrorReport er = error_norms(S, sr.g, p.exact());
  out << "problem=" << p.name << " k=" << k << " elements=" << m.elements.size() << " generators=" << S.dofs.n
      << " free=" << S.free.size() << '\n'
      << "solver=" << sr.method << " residual=" << fmt(sr.rel_residual) << " iterations=" << sr.iterations
      << " min_pivot=" << fmt(sr.min_pivot) << '\n'
      << "e_H1=" << fmt(er.e_H1) << " e_L2=" << fmt(er.e_L2) << " energy=" << fmt(norm_1S(S, sr.g))
      << " worst_element=" << er.worst_element << '\n';
  if (!c.output.empty()) {
    write_json_file(field_to_json(S, sr.g), c.output);
    out << "wrote field to " << c.output << '\n';
  }
  if (!c.matrix_output.empty()) {
    export_coordinate(S.A_ff, c.matrix_output);
    out << "wrote matrix to " << c.matrix_output << '\n';
  }
  return kPass;
}

inline int cmd_mesh_info(const RunConfig& c, std::ostream& out, double theta = 0.1) {
  validate(c);
  const Mesh m = make_mesh(c, c.n);
  int types[4] = {0, 0, 0, 0};
  double rho = 1e300, edge = 1e300, hmax = 0.0;
  for (int el = 0; el < static_cast<int>(m.elements.size()); ++el) {
    ++types[static_cast<int>(element_type(m, el))];
    rho = std::min(rho, m.elements[el].rho_ratio);
    edge = std::min(edge, m.elements[el].min_edge_ratio);
    hmax = std::max(hmax, m.elements[el].h);
  }
  int curved = 0, bd = 0, br = 0;
  for (const auto& e : m.edges) {
    curved += e.is_curved_declared();
    bd += e.boundary == BoundaryTag::Dirichlet;
    br += e.boundary == BoundaryTag::Robin;
  }
  const bool ok = rho >= theta && edge >= theta;
  out << "vertices=" << m.vertices.size() << " edges=" << m.edges.size() << " elements=" << m.elements.size() << '\n'
      << "curved_edges=" << curved << " dirichlet_edges=" << bd << " robin_edges=" << br << '\n'
      << "types: straight=" << types[0] << " interface=" << types[1] << " dirichlet=" << types[2]
      << " robin=" << types[3] << '\n'
      << "h=" << fmt(hmax) << " min_star_ratio=" << fmt(rho) << " min_edge_ratio=" << fmt(edge) << '\n'
      << "assumptions (theta=" << theta << "): " << (ok ? "ok" : "violated") << '\n';
  return ok ? kPass : kToleranceFailure;
}

inline int cmd_gen_mesh(const RunConfig& c, std::ostream& out) {
  validate(c);
  if (c.output.empty()) throw ConfigError("gen-mesh needs an output path");
  const Mesh m = make_mesh(c, c.n);
  write_mesh(m, c.output);
  out << "wrote " << m.elements.size() << " elements to " << c.output << '\n';
  return kPass;
}

/// Runs a command, mapping input errors to exit code 2.
template <class F>
int guarded(F&& f, std::ostream& err = std::cerr) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const MeshError& e) {
    err << "mesh error: " << e.what() << '\n';
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
  } catch (const GeometryError& e) {
    err << "geometry error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
  } catch (const NotPositiveDefinite& e) {
    err << "solver error: " << e.what() << '\n';
    return kToleranceFailure;
  }
  return kInputError;
}

}  // namespace curvem
