// weingarten: numerical lab for rotational elliptic Weingarten surfaces in
// S^2 x R.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "weingarten/io/run.hpp"

int main(int argc, char** argv) {
  using namespace weingarten;
  CLI::App app{"Rotational elliptic Weingarten surfaces in S^2 x R"};
  app.require_subcommand(1, 1);
  app.fallthrough();  // options may follow the subcommand
  std::string config_path, g_expr, out_dir = ".";
  app.add_option("--config", config_path, "INI-style run configuration")->check(CLI::ExistingFile);
  app.add_option("--g-expr", g_expr, "relation g(k) as an expression in k (overrides [relation])");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  const std::pair<const char*, const char*> commands[] = {
      {"orbit", "integrate one orbit: orbit.csv, orbit.json"},
      {"portrait", "phase portrait: portrait.svg, upsilon.csv, slope_field.csv"},
      {"canonical", "profile from the North pole: canonical.csv, canonical.json"},
      {"certify", "boundedness sweep with envelope checks: certify.json"},
      {"hopf", "sweep plus sphere verdict: hopf.json"},
      {"compare", "orbit branch against its affine envelopes: compare.csv, compare.json"},
      {"mesh", "surface of revolution: mesh.obj"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.footer("Thread count for sweeps: WEINGARTEN_THREADS (default: hardware concurrency).");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : io::kExitConfig;
  }

  io::RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = io::parse_config(ss.str());
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io::kExitConfig;
  }
  if (!g_expr.empty()) {
    cfg.relation.family = "dsl";
    cfg.relation.expression = g_expr;
  }
  const auto cmd = io::parse_command(app.get_subcommands().front()->get_name());
  return io::run(*cmd, cfg, out_dir, std::cout, std::cerr);
}
