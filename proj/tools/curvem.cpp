// Command-line driver: patch-test, convergence, solve, mesh-info, gen-mesh.

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <vector>

#include "curvem/driver.hpp"

using namespace curvem;

namespace {

/// Options common to every command. Flags that were given override the config file.
struct Flags {
  RunConfig v;
  std::string config;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bound;

  template <class T>
  void add(CLI::App* app, const std::string& name, T RunConfig::*field, const std::string& help) {
    CLI::Option* o = app->add_option(name, v.*field, help);
    bound.emplace_back(o, [this, field](RunConfig& c) { c.*field = v.*field; });
  }

  void add_flag(CLI::App* app, const std::string& name, bool RunConfig::*field, const std::string& help) {
    CLI::Option* o = app->add_flag(name, v.*field, help);
    bound.emplace_back(o, [this, field](RunConfig& c) { c.*field = v.*field; });
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_config(config);
    for (const auto& [opt, apply] : bound)
      if (opt->count() > 0) apply(c);
    return c;
  }
};

void common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file (flags override its values)");
  f.add(app, "-k,--k", &RunConfig::k, "polynomial degrees");
  f.add(app, "--mesh", &RunConfig::mesh_file, "mesh file (curvem-mesh/1)");
  f.add(app, "--generator", &RunConfig::generator, "square-circle-interface | disk-boundary | square-straight");
  f.add(app, "-n,--n", &RunConfig::n, "refinement parameter of the generator");
  f.add(app, "--levels", &RunConfig::levels, "refinement parameters of a convergence study");
  f.add(app, "--radius", &RunConfig::radius, "interface radius");
  f.add(app, "--boundary", &RunConfig::boundary, "dirichlet | robin | mixed");
  f.add(app, "--arc", &RunConfig::arc, "arc | chord | straight");
  f.add_flag(app, "--reparametrize", &RunConfig::reparametrize, "apply the cubic reparametrization to every curve");
  f.add(app, "--problem", &RunConfig::problem, "builtin problem");
  f.add(app, "--curved-points", &RunConfig::curved_points, "quadrature points per curved edge (0: default)");
  f.add(app, "--interior-order", &RunConfig::interior_order, "interior quadrature order (0: default)");
  f.add(app, "--ownership", &RunConfig::ownership, "smaller-id | larger-kappa | two-sided");
  f.add(app, "--solver", &RunConfig::solver, "direct | cg");
  f.add(app, "--threads", &RunConfig::threads, "assembly threads");
  f.add(app, "--corrupt-tgp", &RunConfig::tgp_corruption, "shift of the tg apex in units of h (negative control)");
  f.add(app, "--tolerance", &RunConfig::tolerance, "patch-test tolerance on relative e_H1");
  f.add(app, "--rate-slack", &RunConfig::rate_slack, "fail when the finest rate is below k minus this");
  f.add(app, "-o,--output", &RunConfig::output, "output path");
  f.add(app, "--matrix", &RunConfig::matrix_output, "write the reduced matrix in coordinate format");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curved-edge virtual element solver"};
  app.require_subcommand(1);
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, std::ostream&);
  };
  const Cmd cmds[] = {
      {"patch-test", "solve polynomial problems and check exactness", cmd_patch_test},
      {"convergence", "convergence study; prints a CSV rate table", cmd_convergence},
      {"solve", "solve one problem and dump the field", cmd_solve},
      {"mesh-info", "mesh statistics and shape-regularity diagnostics",
       [](const RunConfig& c, std::ostream& o) { return cmd_mesh_info(c, o); }},
      {"gen-mesh", "write a generated mesh", cmd_gen_mesh},
  };
  std::vector<Flags> flags(std::size(cmds));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    CLI::App* s = app.add_subcommand(cmds[i].name, cmds[i].help);
    common(s, flags[i]);
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) return guarded([&] { return cmds[i].run(flags[i].resolve(), std::cout); });
  return kInputError;
}
