#include "qfikit/scenario.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qfikit/errors.hpp"
#include "qfikit/qfi_engine.hpp"
#include "qfikit/spin_models.hpp"

namespace qfikit::scenario {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  const std::string v = trim(s);
  if (v.empty()) throw ValidationError(where + ": empty number");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw ValidationError(where + ": '" + v + "' is not a finite number");
  return x;
}

int parse_int(const std::string& s, const std::string& where) {
  const std::string v = trim(s);
  int x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ValidationError(where + ": '" + v + "' is not an integer");
  return x;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) { return std::to_string(v); }

const std::set<std::string>& spin_param_names() {
  static const std::set<std::string> names{"B", "theta", "t", "j", "beta", "Bt"};
  return names;
}

const std::set<std::string>& custom_param_names() {
  static const std::set<std::string> names{"alpha", "t"};
  return names;
}

const std::set<std::string>& allowed_param_names(Model m) {
  return m == Model::custom_matrix ? custom_param_names() : spin_param_names();
}

// ---- grid -------------------------------------------------------------------

long total_points(const std::vector<SweepAxis>& axes) {
  long n = 1;
  for (const auto& a : axes) n *= a.steps;
  return n;
}

std::vector<double> point_values(const std::vector<SweepAxis>& axes, long flat) {
  std::vector<double> v(axes.size());
  for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
    const long s = axes[a].steps;
    v[a] = axes[a].value(static_cast<int>(flat % s));
    flat /= s;
  }
  return v;
}

// ---- per-point parameter resolution ------------------------------------------

std::map<std::string, double> model_defaults(Model m) {
  if (m == Model::custom_matrix) return {{"alpha", 0.0}, {"t", 1.0}};
  return {{"B", M_PI}, {"theta", 0.0}, {"t", 1.0}, {"j", 0.5}, {"beta", 1.0}};
}

std::map<std::string, double> resolve_point(const ScenarioConfig& cfg,
                                            const std::map<std::string, double>& base,
                                            const std::vector<double>& axis_values) {
  std::map<std::string, double> p = base;
  for (size_t a = 0; a < cfg.sweeps.size(); ++a) {
    const std::string& name = cfg.sweeps[a].name;
    if (name == "Bt") {
      if (p.at("t") == 0.0)
        throw ValidationError("sweep over Bt requires a nonzero t");
      p["B"] = axis_values[a] / p.at("t");
    } else {
      p[name] = axis_values[a];
    }
  }
  return p;
}

spin::SpinParams spin_params_from(const std::map<std::string, double>& p) {
  return spin::SpinParams{p.at("j"), p.at("B"), p.at("theta"), p.at("t")};
}

Eigen::Vector3d resolve_r_in(const std::string& chosen, Model model,
                             const spin::DirectionVectors& d) {
  std::string s = chosen;
  if (s.empty()) {
    switch (model) {
      case Model::spin_theta: s = "n0"; break;
      case Model::spin_B: s = "n0p"; break;
      case Model::two_param: s = "n2"; break;
      default: s = "n0"; break;
    }
  }
  if (s == "n0") return d.n0;
  if (s == "n0p") return d.n0_prime;
  if (s == "n1" || s == "n2") {
    if (d.mu == 0)
      throw ValidationError("state.r_in = " + s +
                            " is undefined where sin(Bt/2) = 0");
    return s == "n1" ? *d.n1 : *d.n2;
  }
  const auto parts = split(s, ',');
  if (parts.size() != 3)
    throw ValidationError("state.r_in must be n0, n0p, n1, n2 or three comma-separated numbers");
  Eigen::Vector3d r;
  for (int i = 0; i < 3; ++i) r(i) = parse_double(parts[i], "state.r_in");
  return r;
}

GeneratorResult generator_via(Backend b, const HamiltonianFamily& fam,
                              const std::string& param) {
  switch (b) {
    case Backend::series: return h_via_series(fam, param);
    case Backend::quadrature: return h_via_quadrature(fam, param);
    case Backend::finite_difference: return h_via_finite_difference(fam, param);
    case Backend::closed_form: {
      auto r = h_closed_form(fam, param);
      if (!r)
        throw ValidationError(
            "closed_form backend is not applicable to this family; "
            "choose series, quadrature or finite_difference");
      return *r;
    }
  }
  throw ValidationError("unknown backend");
}

ComplexVector bloch_state_vector(const Eigen::Vector3d& r) {
  BlochVector rb{r.x(), r.y(), r.z()};
  const DensityMatrix rho = density_from_bloch(rb);
  const SpectralDecomposition& es = rho.eigensystem();
  return es.eigenvectors.col(1);  // eigenvalue 1 for a pure state, ascending order
}

void require_qubit_j(const std::map<std::string, double>& p, const char* what) {
  if (std::abs(p.at("j") - 0.5) > 1e-12)
    throw ValidationError(std::string(what) +
                          " uses Bloch-vector states and requires j = 0.5");
}

void check_finite_rows(const SweepResult& r) {
  for (const auto& row : r.rows)
    for (double v : row)
      if (!std::isfinite(v)) throw ValidationError("non-finite value in output");
}

}  // namespace

// ---- names --------------------------------------------------------------------

std::string to_string(Model m) {
  switch (m) {
    case Model::spin_theta: return "spin_theta";
    case Model::spin_B: return "spin_B";
    case Model::thermal: return "thermal";
    case Model::two_param: return "two_param";
    case Model::custom_matrix: return "custom_matrix";
  }
  return "unknown";
}

std::optional<Model> model_from_string(const std::string& name) {
  if (name == "spin_theta") return Model::spin_theta;
  if (name == "spin_B") return Model::spin_B;
  if (name == "thermal") return Model::thermal;
  if (name == "two_param") return Model::two_param;
  if (name == "custom_matrix") return Model::custom_matrix;
  return std::nullopt;
}

double SweepAxis::value(int i) const {
  if (steps == 1) return min;
  return min + (max - min) * double(i) / double(steps - 1);
}

// ---- config parsing -------------------------------------------------------------

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  bool have_model = false;
  std::set<std::string> seen;
  std::vector<std::string> sweep_order;
  std::map<std::string, SweepAxis> sweeps;
  std::map<std::string, std::set<std::string>> sweep_parts;

  const auto lines = split(text, '\n');
  for (size_t li = 0; li < lines.size(); ++li) {
    const std::string where = "line " + std::to_string(li + 1);
    const std::string line = trim(lines[li]);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(where + ": empty key");
    if (!seen.insert(key).second)
      throw ValidationError(where + ": duplicate key '" + key + "'");

    if (key == "model") {
      const auto m = model_from_string(value);
      if (!m) throw ValidationError(where + ": unknown model '" + value + "'");
      cfg.model = *m;
      have_model = true;
    } else if (key.rfind("param.", 0) == 0) {
      const std::string name = key.substr(6);
      if (name.empty()) throw ValidationError(where + ": empty parameter name");
      cfg.params[name] = parse_double(value, where);
    } else if (key.rfind("sweep.", 0) == 0) {
      const auto rest = key.substr(6);
      const auto dot = rest.find('.');
      if (dot == std::string::npos)
        throw ValidationError(where + ": expected sweep.<name>.{min,max,steps}");
      const std::string name = rest.substr(0, dot);
      const std::string field = rest.substr(dot + 1);
      if (name.empty()) throw ValidationError(where + ": empty sweep name");
      if (sweeps.find(name) == sweeps.end()) {
        sweep_order.push_back(name);
        sweeps[name].name = name;
      }
      if (field == "min") {
        sweeps[name].min = parse_double(value, where);
      } else if (field == "max") {
        sweeps[name].max = parse_double(value, where);
      } else if (field == "steps") {
        sweeps[name].steps = parse_int(value, where);
        if (sweeps[name].steps < 1)
          throw ValidationError(where + ": steps must be >= 1");
      } else {
        throw ValidationError(where + ": unknown sweep field '" + field + "'");
      }
      sweep_parts[name].insert(field);
    } else if (key == "backends") {
      for (const auto& part : split(value, ',')) {
        const std::string name = trim(part);
        const auto b = backend_from_string(name);
        if (!b) throw ValidationError(where + ": unknown backend '" + name + "'");
        cfg.backends.push_back(*b);
      }
      if (cfg.backends.empty())
        throw ValidationError(where + ": backends list is empty");
    } else if (key == "output.path") {
      cfg.output_path = value;
    } else if (key == "output.format") {
      if (value == "csv") cfg.format = OutputFormat::csv;
      else if (value == "json") cfg.format = OutputFormat::json;
      else throw ValidationError(where + ": format must be csv or json");
    } else if (key == "state.r_in") {
      cfg.r_in = value;
    } else if (key == "route") {
      if (value != "closed_form" && value != "exponential" && value != "qubit")
        throw ValidationError(where +
                              ": route must be closed_form, exponential or qubit");
      cfg.route = value;
    } else if (key == "custom.file") {
      cfg.custom_file = value;
    } else if (key == "ring.samples") {
      cfg.ring_samples = parse_int(value, where);
      if (cfg.ring_samples < 1)
        throw ValidationError(where + ": ring.samples must be >= 1");
    } else {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }

  if (!have_model) throw ValidationError("config: missing required key 'model'");
  for (const auto& name : sweep_order) {
    const auto& parts = sweep_parts[name];
    for (const char* field : {"min", "max", "steps"})
      if (parts.find(field) == parts.end())
        throw ValidationError("config: sweep." + name + "." + field + " is missing");
    if (sweeps[name].min > sweeps[name].max)
      throw ValidationError("config: sweep." + name + " has min > max");
    cfg.sweeps.push_back(sweeps[name]);
  }
  if (cfg.sweeps.size() > 2)
    throw ValidationError("config: at most 2 swept parameters are supported");

  const auto& allowed = allowed_param_names(cfg.model);
  for (const auto& [k, v] : cfg.params)
    if (allowed.find(k) == allowed.end())
      throw ValidationError("config: parameter '" + k + "' is not defined for model " +
                            to_string(cfg.model));
  for (const auto& ax : cfg.sweeps)
    if (allowed.find(ax.name) == allowed.end())
      throw ValidationError("config: sweep parameter '" + ax.name +
                            "' is not defined for model " + to_string(cfg.model));
  if (cfg.model == Model::custom_matrix && cfg.custom_file.empty())
    throw ValidationError("config: custom_matrix model requires custom.file");
  if (!cfg.r_in.empty() &&
      (cfg.model == Model::thermal || cfg.model == Model::custom_matrix))
    throw ValidationError("config: state.r_in is not supported for model " +
                          to_string(cfg.model));
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// ---- custom families -------------------------------------------------------------

namespace {

ComplexMatrix json_matrix(const ordered_json& doc, const std::string& key, int dim) {
  if (!doc.contains(key))
    throw ValidationError("custom family file: missing key '" + key + "'");
  const auto& rows = doc.at(key);
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
    throw ValidationError("custom family file: '" + key + "' must be a " +
                          std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const auto& row = rows.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw ValidationError("custom family file: row size mismatch in '" + key + "'");
    for (int j = 0; j < dim; ++j) {
      const auto& e = row.at(j);
      if (!e.is_array() || e.size() != 2 || !e.at(0).is_number() || !e.at(1).is_number())
        throw ValidationError("custom family file: entries must be [re, im] pairs");
      m(i, j) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

ordered_json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open custom family file: " + path);
  try {
    return ordered_json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("custom family file " + path + ": " + e.what());
  }
}

}  // namespace

HamiltonianFamily load_custom_family(const std::string& path) {
  const ordered_json doc = read_json_file(path);
  if (!doc.contains("dim") || !doc.at("dim").is_number_integer())
    throw ValidationError("custom family file: missing integer 'dim'");
  const int dim = doc.at("dim").get<int>();
  if (dim < 1) throw ValidationError("custom family file: dim must be >= 1");

  const HermitianOperator h0(json_matrix(doc, "H0", dim));
  const HermitianOperator h1(json_matrix(doc, "H1", dim));
  const double t = doc.contains("t") ? doc.at("t").get<double>() : 1.0;
  const double alpha = doc.contains("alpha") ? doc.at("alpha").get<double>() : 0.0;

  HamiltonianFamily fam;
  fam.dim = dim;
  fam.params = {{"alpha", alpha}, {"t", t}};
  fam.eval = [h0, h1](const ParamMap& m) {
    return HermitianOperator(h0.matrix() + m.at("alpha") * h1.matrix());
  };
  fam.eval_derivative = [h1, dim](const ParamMap&, const std::string& param) {
    if (param == "alpha") return h1;
    if (param == "t") return HermitianOperator(ComplexMatrix::Zero(dim, dim));
    throw ValidationError("custom family: unknown parameter '" + param + "'");
  };
  return fam;
}

ComplexVector load_custom_initial_state(const std::string& path, int dim) {
  const ordered_json doc = read_json_file(path);
  if (!doc.contains("psi0")) {
    ComplexVector psi = ComplexVector::Constant(dim, Complex(1.0, 0.0));
    return psi / psi.norm();
  }
  const auto& arr = doc.at("psi0");
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
    throw ValidationError("custom family file: psi0 must have length dim");
  ComplexVector psi(dim);
  for (int i = 0; i < dim; ++i) {
    const auto& e = arr.at(i);
    if (!e.is_array() || e.size() != 2)
      throw ValidationError("custom family file: psi0 entries must be [re, im] pairs");
    psi(i) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
  }
  const double n = psi.norm();
  if (!(n > 0.0)) throw ValidationError("custom family file: psi0 is zero");
  return psi / n;
}

// ---- scenario execution ------------------------------------------------------------

SweepResult run_scenario(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  if (c.model == Model::thermal && c.sweeps.empty()) {
    c.sweeps.push_back({"Bt", 0.0, 2.0 * M_PI, 101});
    c.sweeps.push_back({"theta", 0.0, 2.0 * M_PI, 101});
  }
  const Backend backend = c.backends.empty() ? Backend::series : c.backends.front();

  std::map<std::string, double> base = model_defaults(c.model);
  HamiltonianFamily custom;
  ComplexVector custom_psi;
  if (c.model == Model::custom_matrix) {
    custom = load_custom_family(c.custom_file);
    custom_psi = load_custom_initial_state(c.custom_file, custom.dim);
    base = {{"alpha", custom.params.at("alpha")}, {"t", custom.params.at("t")}};
  }
  for (const auto& [k, v] : c.params) base[k] = v;
  if (c.model != Model::custom_matrix && base.count("Bt")) {
    if (base.at("t") == 0.0) throw ValidationError("param.Bt requires a nonzero t");
    base["B"] = base.at("Bt") / base.at("t");
    base.erase("Bt");
  }

  SweepResult out;
  out.axes = c.sweeps;
  for (const auto& ax : c.sweeps) out.columns.push_back(ax.name);
  switch (c.model) {
    case Model::spin_theta:
    case Model::spin_B:
    case Model::thermal:
    case Model::custom_matrix:
      out.columns.push_back("F");
      break;
    case Model::two_param:
      for (const char* name :
           {"F_BB", "F_Btheta", "F_thetatheta", "det_F", "cr_achievable"})
        out.columns.push_back(name);
      break;
  }
  out.provenance.emplace_back("model", to_string(c.model));
  if (c.model == Model::thermal) {
    out.provenance.emplace_back("route", c.route);
    if (c.route != "closed_form")
      out.provenance.emplace_back("backend", to_string(backend));
  } else if (c.model != Model::two_param) {
    out.provenance.emplace_back("backend", to_string(backend));
  }

  const long n = total_points(c.sweeps);
  out.rows.reserve(n);
  for (long flat = 0; flat < n; ++flat) {
    const std::vector<double> axis_values = point_values(c.sweeps, flat);
    const auto p = resolve_point(c, base, axis_values);
    std::vector<double> row = axis_values;

    switch (c.model) {
      case Model::spin_theta:
      case Model::spin_B: {
        require_qubit_j(p, "run_scenario spin model");
        const spin::SpinParams sp = spin_params_from(p);
        const auto d = spin::direction_vectors(sp);
        const Eigen::Vector3d r = resolve_r_in(c.r_in, c.model, d);
        const HamiltonianFamily fam = spin::spin_hamiltonian_family(sp);
        const std::string param = c.model == Model::spin_theta ? "theta" : "B";
        const GeneratorResult g = generator_via(backend, fam, param);
        const DensityMatrix rho = density_from_bloch({r.x(), r.y(), r.z()});
        row.push_back(qfi_qubit(rho, g.h));
        break;
      }
      case Model::thermal: {
        require_qubit_j(p, "run_scenario thermal model");
        const spin::SpinParams sp = spin_params_from(p);
        const double beta = p.at("beta");
        if (c.route == "closed_form") {
          row.push_back(spin::qfi_thermal(beta, sp));
        } else {
          const HamiltonianFamily fam = spin::spin_hamiltonian_family(sp);
          const GeneratorResult g = generator_via(backend, fam, "theta");
          const spin::ThermalQubit th = spin::thermal_qubit(beta);
          row.push_back(c.route == "exponential" ? qfi_exponential(th.state, g.h)
                                                 : qfi_qubit(th.rho, g.h));
        }
        break;
      }
      case Model::two_param: {
        require_qubit_j(p, "run_scenario two_param model");
        const spin::SpinParams sp = spin_params_from(p);
        const auto d = spin::direction_vectors(sp);
        const Eigen::Vector3d r = resolve_r_in(c.r_in, c.model, d);
        const QFIMatrix fm =
            spin::qfi_matrix_qubit_Btheta({r.x(), r.y(), r.z()}, sp);
        const double f_bb = fm.entries(0, 0).real();
        const double f_bt = fm.entries(0, 1).real();
        const double f_tt = fm.entries(1, 1).real();
        const ComplexVector psi = bloch_state_vector(r);
        const CRResult cr = cr_achievable_pure(
            psi, {spin::h_analytic_B(sp), spin::h_analytic_theta(sp)});
        row.insert(row.end(), {f_bb, f_bt, f_tt, f_bb * f_tt - f_bt * f_bt,
                               cr.achievable ? 1.0 : 0.0});
        break;
      }
      case Model::custom_matrix: {
        HamiltonianFamily fam = custom;
        fam.params["alpha"] = p.at("alpha");
        fam.params["t"] = p.at("t");
        const GeneratorResult g = generator_via(backend, fam, "alpha");
        row.push_back(qfi_pure(custom_psi, g.h));
        break;
      }
    }
    out.rows.push_back(std::move(row));
  }
  check_finite_rows(out);
  return out;
}

ValidationReport validate_backends(const ScenarioConfig& cfg, double tolerance) {
  ScenarioConfig c = cfg;
  if (c.model == Model::thermal && c.sweeps.empty()) {
    c.sweeps.push_back({"Bt", 0.0, 2.0 * M_PI, 101});
    c.sweeps.push_back({"theta", 0.0, 2.0 * M_PI, 101});
  }
  std::vector<Backend> backends = c.backends;
  if (backends.empty())
    backends = {Backend::closed_form, Backend::series, Backend::quadrature,
                Backend::finite_difference};
  if (backends.size() < 2)
    throw ValidationError("validate_backends: need at least 2 backends");

  std::map<std::string, double> base = model_defaults(c.model);
  HamiltonianFamily custom;
  if (c.model == Model::custom_matrix) {
    custom = load_custom_family(c.custom_file);
    base = {{"alpha", custom.params.at("alpha")}, {"t", custom.params.at("t")}};
  }
  for (const auto& [k, v] : c.params) base[k] = v;
  if (c.model != Model::custom_matrix && base.count("Bt")) {
    if (base.at("t") == 0.0) throw ValidationError("param.Bt requires a nonzero t");
    base["B"] = base.at("Bt") / base.at("t");
    base.erase("Bt");
  }

  std::vector<std::string> params_to_check;
  switch (c.model) {
    case Model::spin_theta: params_to_check = {"theta"}; break;
    case Model::spin_B: params_to_check = {"B"}; break;
    case Model::thermal: params_to_check = {"theta"}; break;
    case Model::two_param: params_to_check = {"B", "theta"}; break;
    case Model::custom_matrix: params_to_check = {"alpha"}; break;
  }

  ValidationReport report;
  report.table.axes = c.sweeps;
  for (const auto& ax : c.sweeps) report.table.columns.push_back(ax.name);
  report.table.columns.push_back("max_dev");

  const long n = total_points(c.sweeps);
  long skipped = 0;
  for (long flat = 0; flat < n; ++flat) {
    const std::vector<double> axis_values = point_values(c.sweeps, flat);
    const auto p = resolve_point(c, base, axis_values);

    HamiltonianFamily fam;
    if (c.model == Model::custom_matrix) {
      fam = custom;
      fam.params["alpha"] = p.at("alpha");
      fam.params["t"] = p.at("t");
    } else {
      fam = spin::spin_hamiltonian_family(spin_params_from(p));
    }

    double point_dev = 0.0;
    for (const auto& param : params_to_check) {
      std::vector<ComplexMatrix> results;
      bool closed_form_skipped = false;
      for (Backend b : backends) {
        if (b == Backend::closed_form) {
          auto r = h_closed_form(fam, param);
          if (!r) {
            closed_form_skipped = true;
            continue;
          }
          results.push_back(r->h.matrix());
        } else {
          results.push_back(generator_via(b, fam, param).h.matrix());
        }
      }
      if (closed_form_skipped) ++skipped;
      for (size_t a = 0; a < results.size(); ++a)
        for (size_t b = a + 1; b < results.size(); ++b)
          point_dev = std::max(point_dev, max_norm(results[a] - results[b]));
    }
    std::vector<double> row = axis_values;
    row.push_back(point_dev);
    report.table.rows.push_back(std::move(row));
    report.max_deviation = std::max(report.max_deviation, point_dev);
  }

  report.ok = report.max_deviation <= tolerance;
  std::string backend_names;
  for (size_t i = 0; i < backends.size(); ++i) {
    if (i) backend_names += ", ";
    backend_names += to_string(backends[i]);
  }
  report.lines.push_back("model: " + to_string(c.model) + ", grid points: " +
                         std::to_string(n));
  report.lines.push_back("backends: " + backend_names);
  if (skipped > 0)
    report.lines.push_back("closed_form skipped: NotApplicable (" +
                           std::to_string(skipped) + " of " + std::to_string(n) +
                           " checks)");
  report.lines.push_back("max pairwise deviation: " + fmt(report.max_deviation) +
                         " (tolerance " + fmt(tolerance) + ")");
  report.lines.push_back(report.ok ? "OK" : "DEVIATION EXCEEDS TOLERANCE");

  report.table.provenance.emplace_back("model", to_string(c.model));
  report.table.provenance.emplace_back("backends", backend_names);
  report.table.provenance.emplace_back("tolerance", fmt(tolerance));
  check_finite_rows(report.table);
  return report;
}

SweepResult emit_optimal_ring(const ScenarioConfig& cfg) {
  if (cfg.model != Model::spin_theta && cfg.model != Model::spin_B)
    throw ValidationError("ring output requires model spin_theta or spin_B");
  std::map<std::string, double> base = model_defaults(cfg.model);
  for (const auto& [k, v] : cfg.params) base[k] = v;
  if (base.count("Bt")) {
    if (base.at("t") == 0.0) throw ValidationError("param.Bt requires a nonzero t");
    base["B"] = base.at("Bt") / base.at("t");
    base.erase("Bt");
  }
  if (!cfg.sweeps.empty())
    throw ValidationError("ring output does not support sweeps");

  const spin::SpinParams sp = spin_params_from(base);
  const std::string param = cfg.model == Model::spin_theta ? "theta" : "B";
  const spin::OptimalRing ring = spin::optimal_state_ring(sp, param, cfg.ring_samples);

  SweepResult out;
  out.columns = {"k", "rx", "ry", "rz", "axis_x", "axis_y", "axis_z", "F"};
  out.provenance.emplace_back("model", to_string(cfg.model));
  out.provenance.emplace_back("param", param);
  out.provenance.emplace_back("samples", fmt(cfg.ring_samples));
  out.provenance.emplace_back("qfi_max", fmt(ring.qfi_max));
  for (size_t k = 0; k < ring.points.size(); ++k) {
    const auto& r = ring.points[k];
    out.rows.push_back({double(k), r.x, r.y, r.z, ring.axis.x(), ring.axis.y(),
                        ring.axis.z(), ring.qfi[k]});
  }
  check_finite_rows(out);
  return out;
}

// ---- output rendering ----------------------------------------------------------

std::string to_csv(const SweepResult& result) {
  std::string out;
  for (const auto& [k, v] : result.provenance) out += "# " + k + "=" + v + "\n";
  for (size_t i = 0; i < result.columns.size(); ++i) {
    if (i) out += ",";
    out += result.columns[i];
  }
  out += "\n";
  for (const auto& row : result.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += fmt(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string to_json_text(const SweepResult& result) {
  ordered_json doc;
  doc["axes"] = ordered_json::array();
  for (const auto& ax : result.axes)
    doc["axes"].push_back(ordered_json{
        {"name", ax.name}, {"min", ax.min}, {"max", ax.max}, {"steps", ax.steps}});
  doc["columns"] = result.columns;
  doc["provenance"] = ordered_json::object();
  for (const auto& [k, v] : result.provenance) doc["provenance"][k] = v;
  doc["rows"] = result.rows;
  return doc.dump(2) + "\n";
}

std::string render(const SweepResult& result, OutputFormat format) {
  return format == OutputFormat::csv ? to_csv(result) : to_json_text(result);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open output file for writing: " + path);
  f << content;
  if (!f) throw ValidationError("failed while writing output file: " + path);
}

double comparison_tolerance_from_env(double fallback) {
  const char* raw = std::getenv("QFIKIT_TOLERANCE");
  if (raw == nullptr || *raw == '\0') return fallback;
  const double v = parse_double(raw, "QFIKIT_TOLERANCE");
  if (!(v > 0.0))
    throw ValidationError("QFIKIT_TOLERANCE must be a positive number");
  return v;
}

// ---- selftest -------------------------------------------------------------------

namespace {

void expect(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void selftest_spectral() {
  const auto ops = spin::collective_spin_operators(1.5);
  const ComplexMatrix m = ops.jx.matrix() + 0.4 * ops.jy.matrix() +
                          0.1 * ops.jz.matrix() * ops.jz.matrix();
  const HermitianOperator h(m);
  const auto es = spectral_decompose(h);
  const ComplexMatrix rebuilt =
      es.eigenvectors *
      es.eigenvalues.cast<Complex>().asDiagonal().toDenseMatrix() *
      es.eigenvectors.adjoint();
  expect(max_norm(rebuilt - m) <= 1e-12 * (1.0 + max_norm(m)),
         "spectral reconstruction drift");
}

void selftest_backends() {
  const spin::SpinParams p{1.0, 1.1, 0.7, 0.9};
  const auto fam = spin::spin_hamiltonian_family(p);
  const ComplexMatrix a = h_via_series(fam, "theta").h.matrix();
  const ComplexMatrix b = h_via_quadrature(fam, "theta").h.matrix();
  const ComplexMatrix c = h_via_finite_difference(fam, "theta").h.matrix();
  expect(max_norm(a - b) <= 1e-7, "series vs quadrature deviation");
  expect(max_norm(a - c) <= 1e-7, "series vs finite_difference deviation");
  expect(!h_closed_form(fam, "theta").has_value(),
         "closed form unexpectedly applicable to the rotating family");
}

void selftest_thermal() {
  const spin::SpinParams p{0.5, M_PI, M_PI / 3.0, 1.0};
  const double closed = spin::qfi_thermal(1.0, p);
  const auto th = spin::thermal_qubit(1.0);
  const HermitianOperator h = spin::h_analytic_theta(p);
  const double via_exp = qfi_exponential(th.state, h);
  const double via_qubit = qfi_qubit(th.rho, h);
  const double expected = 4.0 * std::tanh(1.0) * std::tanh(1.0);
  expect(std::abs(closed - expected) <= 1e-9, "thermal closed form off");
  expect(std::abs(via_exp - closed) <= 1e-9, "exponential route deviates");
  expect(std::abs(via_qubit - closed) <= 1e-9, "qubit route deviates");
}

void selftest_ring() {
  const spin::SpinParams p{0.5, M_PI, 0.0, 1.0};
  const auto ring = spin::optimal_state_ring(p, "theta", 32);
  expect((ring.axis - Eigen::Vector3d(0, -1, 0)).norm() <= 1e-12,
         "ring axis misplaced");
  expect(std::abs(ring.qfi_max - 4.0) <= 1e-12, "ring maximum off");
}

void selftest_sld_series() {
  const spin::SpinParams p{0.5, 0.8 * M_PI, 0.3, 1.0};
  const auto th = spin::thermal_qubit(0.5);
  const HermitianOperator h = spin::h_analytic_theta(p);
  const HermitianOperator series = sld_effective_exponential(th.state, h, 30);
  const HermitianOperator closed = sld_effective_exponential_tanh(th.state, h);
  expect(max_norm(series.matrix() - closed.matrix()) <= 1e-8,
         "SLD series vs closed form deviation");
}

}  // namespace

int run_selftest(std::ostream& out) {
  const std::pair<const char*, void (*)()> checks[] = {
      {"spectral_roundtrip", selftest_spectral},
      {"backend_agreement", selftest_backends},
      {"thermal_three_paths", selftest_thermal},
      {"optimal_ring", selftest_ring},
      {"sld_series_vs_closed_form", selftest_sld_series},
  };
  int code = 0;
  for (const auto& [name, fn] : checks) {
    try {
      fn();
      out << "ok " << name << "\n";
    } catch (const ConvergenceError& e) {
      out << "FAIL " << name << ": " << e.what() << "\n";
      code = 3;
    } catch (const std::exception& e) {
      out << "FAIL " << name << ": " << e.what() << "\n";
      if (code == 0) code = 2;
    }
  }
  return code;
}

}  // namespace qfikit::scenario
