#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfikit/errors.hpp"
#include "qfikit/scenario.hpp"

namespace {

using namespace qfikit;
using namespace qfikit::scenario;

struct CommonFlags {
  std::string config_path;
  std::string output_path;
  std::string format_name;
  std::string backend_list;
};

void add_common_options(CLI::App* sub, CommonFlags& flags, bool with_backend) {
  sub->add_option("--config", flags.config_path, "scenario config file")->required();
  sub->add_option("--output", flags.output_path,
                  "output file path (default: config output.path, else stdout)");
  sub->add_option("--format", flags.format_name, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  if (with_backend)
    sub->add_option("--backend", flags.backend_list,
                    "comma-separated backends (closed_form, series, quadrature, "
                    "finite_difference)");
}

ScenarioConfig load_config(const CommonFlags& flags) {
  ScenarioConfig cfg = parse_config_file(flags.config_path);
  if (!flags.output_path.empty()) cfg.output_path = flags.output_path;
  if (!flags.format_name.empty())
    cfg.format = flags.format_name == "json" ? OutputFormat::json : OutputFormat::csv;
  if (!flags.backend_list.empty()) {
    cfg.backends.clear();
    std::string cur;
    for (char c : flags.backend_list + ",") {
      if (c != ',') {
        cur += c;
        continue;
      }
      if (cur.empty()) continue;
      const auto b = backend_from_string(cur);
      if (!b) throw ValidationError("--backend: unknown backend '" + cur + "'");
      cfg.backends.push_back(*b);
      cur.clear();
    }
    if (cfg.backends.empty())
      throw ValidationError("--backend: backend list is empty");
  }
  return cfg;
}

void emit(const SweepResult& result, const ScenarioConfig& cfg) {
  const std::string text = render(result, cfg.format);
  if (cfg.output_path.empty())
    std::cout << text;
  else
    write_text_file(cfg.output_path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum Fisher information toolkit for unitary parametrization processes"};
  app.require_subcommand(1);

  CommonFlags run_flags, validate_flags, ring_flags;
  CLI::App* cmd_run = app.add_subcommand("run", "evaluate a scenario over its sweep grid");
  add_common_options(cmd_run, run_flags, true);
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "cross-check generator backends on a grid");
  add_common_options(cmd_validate, validate_flags, true);
  CLI::App* cmd_ring =
      app.add_subcommand("ring", "emit the optimal-state ring for a spin scenario");
  add_common_options(cmd_ring, ring_flags, false);
  app.add_subcommand("selftest", "run the built-in smoke checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) {
      const ScenarioConfig cfg = load_config(run_flags);
      emit(run_scenario(cfg), cfg);
      return 0;
    }
    if (cmd_validate->parsed()) {
      const ScenarioConfig cfg = load_config(validate_flags);
      const double tol = comparison_tolerance_from_env(1e-6);
      const ValidationReport report = validate_backends(cfg, tol);
      for (const auto& line : report.lines) std::cout << line << "\n";
      if (!cfg.output_path.empty())
        write_text_file(cfg.output_path, render(report.table, cfg.format));
      return report.ok ? 0 : 2;
    }
    if (cmd_ring->parsed()) {
      const ScenarioConfig cfg = load_config(ring_flags);
      emit(emit_optimal_ring(cfg), cfg);
      return 0;
    }
    return run_selftest(std::cout);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
