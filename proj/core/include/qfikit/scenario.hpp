#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfikit/h_operator.hpp"
#include "qfikit/operator_core.hpp"

namespace qfikit::scenario {

enum class Model { spin_theta, spin_B, thermal, two_param, custom_matrix };

std::string to_string(Model m);
std::optional<Model> model_from_string(const std::string& name);

enum class OutputFormat { csv, json };

struct SweepAxis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  double value(int i) const;
};

// Parsed flat key=value scenario description.  Keys:
//   model, param.<name>, sweep.<name>.{min,max,steps}, backends,
//   output.{path,format}, state.r_in, route, custom.file, ring.samples
// The sweep name "Bt" is an alias resolved as B = Bt / t at each grid point.
struct ScenarioConfig {
  Model model = Model::spin_theta;
  std::map<std::string, double> params;
  std::vector<SweepAxis> sweeps;   // at most 2, in file order
  std::vector<Backend> backends;   // empty -> per-verb default
  std::string output_path;         // empty -> stdout
  OutputFormat format = OutputFormat::csv;
  std::string r_in;                // n0 | n0p | n1 | n2 | "x,y,z" | empty (model default)
  std::string route = "closed_form";  // thermal only: closed_form | exponential | qubit
  std::string custom_file;
  int ring_samples = 32;
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

struct SweepResult {
  std::vector<SweepAxis> axes;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // grid order, first axis slowest
  std::vector<std::pair<std::string, std::string>> provenance;
};

// Evaluates the model over the sweep grid.  Columns: the axis values, then
// F for single-parameter models or the (B, theta) Fisher-matrix entries,
// determinant, and achievability flag for two_param.
SweepResult run_scenario(const ScenarioConfig& cfg);

struct ValidationReport {
  bool ok = true;
  double max_deviation = 0.0;
  std::vector<std::string> lines;
  SweepResult table;  // per-point max pairwise deviation
};

// Cross-checks the configured backends' generators per grid point.
ValidationReport validate_backends(const ScenarioConfig& cfg, double tolerance);

// Optimal-state ring dataset for spin_theta / spin_B.
SweepResult emit_optimal_ring(const ScenarioConfig& cfg);

// Linear family H(alpha) = H0 + alpha H1 from a JSON file with keys dim, t,
// alpha, H0, H1 and optional psi0; complex entries are [re, im] pairs.
HamiltonianFamily load_custom_family(const std::string& path);
ComplexVector load_custom_initial_state(const std::string& path, int dim);

std::string to_csv(const SweepResult& result);
std::string to_json_text(const SweepResult& result);
std::string render(const SweepResult& result, OutputFormat format);
void write_text_file(const std::string& path, const std::string& content);

// QFIKIT_TOLERANCE environment override for backend comparisons.
double comparison_tolerance_from_env(double fallback = 1e-6);

// Built-in smoke battery; prints one line per check, returns a process exit
// code (0 ok, 2 check failed, 3 non-convergence).
int run_selftest(std::ostream& out);

}  // namespace qfikit::scenario
