// Batch CLI: every subcommand wraps one module and emits deterministic,
// plot-ready CSV/JSON files. Re-running a command on the same inputs produces
// byte-identical output, independent of the worker count.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "autores/capture.hpp"
#include "autores/duffing.hpp"
#include "autores/equilibria.hpp"
#include "autores/output.hpp"
#include "autores/parallel.hpp"
#include "autores/stability.hpp"
#include "autores/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace autores;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitPrecondition = 4;

struct GlobalOptions {
  std::string out_dir;
  unsigned workers = 0;
  bool dry_run = false;
  std::size_t max_steps = 5'000'000;

  fs::path resolve_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("AUTORES_OUT_DIR"); env && *env) return env;
    return ".";
  }
  unsigned resolve_workers() const { return workers == 0 ? default_workers() : workers; }
};

std::string fmt(double v) { return format_double(v); }

fs::path prepare_out_dir(const GlobalOptions& g) {
  const fs::path dir = g.resolve_out_dir();
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

// Shared pump flags: either a series coefficient list or the closed form.
struct MuFlags {
  std::vector<double> series;
  double c = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();

  void attach(CLI::App* cmd) {
    cmd->add_option("--mu0", series,
                    "pump series coefficients mu_k of tau^{-(2k+1)/2} (list)");
    cmd->add_option("--mu-c", c, "pump closed form amplitude c in c*(1+b*tau)^{-1/2}");
    cmd->add_option("--mu-b", b, "pump closed form rate b");
  }

  bool closed_given() const { return !std::isnan(c) || !std::isnan(b); }

  MuSpec build() const {
    try {
      if (closed_given()) {
        if (!series.empty()) throw ConfigError("give either --mu0 or --mu-c/--mu-b, not both");
        if (std::isnan(c) || std::isnan(b)) {
          throw ConfigError("closed form needs both --mu-c and --mu-b");
        }
        return MuSpec::closed_form(c, b);
      }
      if (series.empty()) return MuSpec::zero();
      return MuSpec::series(series);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("invalid pump: ") + e.what());
    }
  }

  void echo(ParamEcho& e) const {
    if (closed_given()) {
      e.emplace_back("mu_c", fmt(c));
      e.emplace_back("mu_b", fmt(b));
    } else {
      std::string joined;
      const auto& coeffs = series.empty() ? std::vector<double>{0.0} : series;
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) joined += ';';
        joined += fmt(coeffs[i]);
      }
      e.emplace_back("mu0", joined);
    }
  }
};

// ---------------------------------------------------------------------------
// Experiment configuration (JSON document with strict keys).

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
  }
}

double need_number(const json& obj, const char* where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(std::string(where) + " needs '" + key + "'");
  if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

struct StartSpec {
  bool on_series = false;
  double rho = 0.0, psi = 0.0;     // explicit state
  double psi0 = 0.0, d0 = 0.0, angle = 0.0;  // series-anchored start
};

struct ExperimentConfig {
  ModelParams model;
  double tau0 = 0.0, tau_max = 0.0;
  double rel_tol = 1e-10, abs_tol = 1e-12;
  StartSpec start;
  std::optional<BasinGrid> scan;
  std::optional<std::string> directory;
  std::string trajectory_csv = "trajectory.csv";
  std::string verdict_json = "verdict.json";
};

ExperimentConfig parse_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  require_keys(doc, "config", {"model", "run", "scan", "output"});
  if (!doc.contains("model") || !doc.contains("run")) {
    throw ConfigError("config needs 'model' and 'run' sections");
  }

  ExperimentConfig cfg;
  const json& model = doc["model"];
  require_keys(model, "model", {"lambda", "nu", "mu", "rho_floor"});
  cfg.model.lambda = need_number(model, "model", "lambda");
  cfg.model.nu = number_or(model, "nu", 0.0);
  cfg.model.rho_floor = number_or(model, "rho_floor", 1e-8);
  try {
    if (model.contains("mu")) {
      const json& mu = model["mu"];
      require_keys(mu, "model.mu", {"type", "coeffs", "c", "b"});
      const std::string type = mu.value("type", "series");
      if (type == "series") {
        if (!mu.contains("coeffs") || !mu["coeffs"].is_array()) {
          throw ConfigError("series mu needs a 'coeffs' array");
        }
        std::vector<double> coeffs;
        for (const auto& c : mu["coeffs"]) {
          if (!c.is_number()) throw ConfigError("mu coeffs must be numbers");
          coeffs.push_back(c.get<double>());
        }
        cfg.model.mu = MuSpec::series(coeffs);
      } else if (type == "closed_form") {
        cfg.model.mu = MuSpec::closed_form(need_number(mu, "model.mu", "c"),
                                           need_number(mu, "model.mu", "b"));
      } else {
        throw ConfigError("mu type must be 'series' or 'closed_form'");
      }
    }
    cfg.model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid model parameters: ") + e.what());
  }

  const json& run = doc["run"];
  require_keys(run, "run", {"tau0", "tau_max", "rel_tol", "abs_tol", "start"});
  cfg.tau0 = need_number(run, "run", "tau0");
  cfg.tau_max = need_number(run, "run", "tau_max");
  cfg.rel_tol = number_or(run, "rel_tol", 1e-10);
  cfg.abs_tol = number_or(run, "abs_tol", 1e-12);
  if (!(cfg.tau0 > 0.0) || !(cfg.tau_max > cfg.tau0)) {
    throw ConfigError("run needs 0 < tau0 < tau_max");
  }
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (!run.contains("start")) throw ConfigError("run needs a 'start' section");
  const json& start = run["start"];
  require_keys(start, "run.start", {"type", "rho", "psi", "psi0", "d0", "angle"});
  const std::string start_type = start.value("type", "state");
  if (start_type == "state") {
    cfg.start.on_series = false;
    cfg.start.rho = need_number(start, "run.start", "rho");
    cfg.start.psi = need_number(start, "run.start", "psi");
    if (!(cfg.start.rho > cfg.model.rho_floor)) {
      throw ConfigError("start rho must exceed the rho floor");
    }
  } else if (start_type == "series") {
    cfg.start.on_series = true;
    cfg.start.psi0 = need_number(start, "run.start", "psi0");
    cfg.start.d0 = number_or(start, "d0", 0.0);
    cfg.start.angle = number_or(start, "angle", 0.7853981633974483);
  } else {
    throw ConfigError("start type must be 'state' or 'series'");
  }

  if (doc.contains("scan")) {
    const json& scan = doc["scan"];
    require_keys(scan, "scan",
                 {"rho_min", "rho_max", "n_rho", "psi_min", "psi_max", "n_psi"});
    BasinGrid grid;
    grid.rho_min = need_number(scan, "scan", "rho_min");
    grid.rho_max = need_number(scan, "scan", "rho_max");
    grid.n_rho = static_cast<std::size_t>(need_number(scan, "scan", "n_rho"));
    grid.psi_min = need_number(scan, "scan", "psi_min");
    grid.psi_max = need_number(scan, "scan", "psi_max");
    grid.n_psi = static_cast<std::size_t>(need_number(scan, "scan", "n_psi"));
    if (grid.n_rho < 1 || grid.n_psi < 1) throw ConfigError("scan grid counts must be >= 1");
    cfg.scan = grid;
  }

  if (doc.contains("output")) {
    const json& output = doc["output"];
    require_keys(output, "output", {"directory", "trajectory_csv", "verdict_json"});
    if (output.contains("directory")) cfg.directory = output["directory"].get<std::string>();
    cfg.trajectory_csv = output.value("trajectory_csv", cfg.trajectory_csv);
    cfg.verdict_json = output.value("verdict_json", cfg.verdict_json);
  }
  return cfg;
}

ParamEcho model_echo(const ModelParams& p) {
  ParamEcho e;
  e.emplace_back("lambda", fmt(p.lambda));
  e.emplace_back("nu", fmt(p.nu));
  if (const auto* cf = std::get_if<MuClosedForm>(&p.mu.form)) {
    e.emplace_back("mu_c", fmt(cf->c));
    e.emplace_back("mu_b", fmt(cf->b));
  } else {
    std::string joined;
    for (const auto& c : std::get<MuSeries>(p.mu.form).coeffs) {
      if (!joined.empty()) joined += ';';
      joined += fmt(c);
    }
    e.emplace_back("mu0", joined);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Subcommand implementations.

struct EquilibriaArgs {
  double delta = std::numeric_limits<double>::quiet_NaN();
  double nu = 0.0;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  MuFlags mu;
};

int run_equilibria(const GlobalOptions& g, const EquilibriaArgs& a) {
  PhaseParams pp;
  if (!std::isnan(a.delta)) {
    if (!std::isnan(a.lambda)) throw ConfigError("give either --delta or --lambda with a pump");
    pp = PhaseParams{a.delta, a.nu};
  } else if (!std::isnan(a.lambda)) {
    ModelParams p;
    p.lambda = a.lambda;
    p.nu = a.nu;
    p.mu = a.mu.build();
    pp = PhaseParams::from_model(p);
  } else {
    throw ConfigError("equilibria needs --delta or --lambda plus pump flags");
  }
  try {
    pp.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  ParamEcho echo{{"delta", fmt(pp.delta)}, {"nu", fmt(pp.nu)}};
  std::cout << echo_line("equilibria", echo);
  const auto roots = find_roots(pp);
  std::cout << "ell=" << fmt(ell(pp)) << " region=" << to_string(region(pp))
            << " n_roots=" << roots.size() << "\n";
  std::cout << "psi0,p_prime,p_double_prime,p_triple_prime,stability\n";
  for (const auto& r : roots) {
    std::cout << fmt(r.psi0) << ',' << fmt(r.p_prime) << ',' << fmt(r.p_double_prime) << ','
              << fmt(r.p_triple_prime) << ',' << to_string(r.stability) << "\n";
  }
  return kExitOk;
}

struct ScanArgs {
  double delta_min = -1.0, delta_max = 1.0;
  std::size_t n_delta = 41;
  double nu_min = 0.0, nu_max = 3.0;
  std::size_t n_nu = 31;
};

int run_bifurcation_scan(const GlobalOptions& g, const ScanArgs& a) {
  if (a.n_delta < 1 || a.n_nu < 1) throw ConfigError("grid counts must be >= 1");
  try {
    PhaseParams{a.delta_min, 0.0}.validate();
    PhaseParams{a.delta_max, 0.0}.validate();
    PhaseParams{0.0, a.nu_min}.validate();
    PhaseParams{0.0, a.nu_max}.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  const auto deltas = linspace(a.delta_min, a.delta_max, a.n_delta);
  const auto nus = linspace(a.nu_min, a.nu_max, a.n_nu);
  const auto rows = bifurcation_scan(deltas, nus, g.resolve_workers());

  ParamEcho echo{{"delta_min", fmt(a.delta_min)}, {"delta_max", fmt(a.delta_max)},
                 {"n_delta", std::to_string(a.n_delta)}, {"nu_min", fmt(a.nu_min)},
                 {"nu_max", fmt(a.nu_max)}, {"n_nu", std::to_string(a.n_nu)}};
  CsvFile csv("bifurcation-scan", echo,
              {"delta", "nu", "ell", "region", "n_roots", "psi0_1", "psi0_2", "psi0_3", "psi0_4",
               "stab_1", "stab_2", "stab_3", "stab_4"});
  for (const auto& row : rows) {
    std::vector<std::string> cells{fmt(row.delta), fmt(row.nu), fmt(row.ell),
                                   to_string(row.region), std::to_string(row.roots.size())};
    for (std::size_t i = 0; i < 4; ++i) {
      cells.push_back(i < row.roots.size() ? fmt(row.roots[i].psi0) : "");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      cells.push_back(i < row.roots.size() ? to_string(row.roots[i].stability) : "");
    }
    csv.row(cells);
  }
  csv.write(prepare_out_dir(g) / "bifurcation_scan.csv");
  return kExitOk;
}

int run_simulate(const GlobalOptions& g, const std::string& config_path) {
  const ExperimentConfig cfg = parse_experiment_config(config_path);
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  ModelState start;
  if (cfg.start.on_series) {
    const SeriesCoeffs c = compute_coeffs(cfg.model, cfg.start.psi0);
    const ModelState ref = eval_series(c, cfg.tau0);
    const double w0 =
        std::sqrt(std::abs(c.p_prime)) * std::pow(4.0 * cfg.model.lambda, -0.25);
    start.rho = ref.rho + w0 * std::pow(cfg.tau0, -0.25) * cfg.start.d0 * std::cos(cfg.start.angle);
    start.psi = ref.psi + cfg.start.d0 * std::sin(cfg.start.angle);
  } else {
    start.rho = cfg.start.rho;
    start.psi = cfg.start.psi;
  }

  IntegrationConfig icfg = ms_capture_config(cfg.model, cfg.tau_max, cfg.rel_tol, cfg.abs_tol);
  icfg.max_steps = g.max_steps;
  const Trajectory traj =
      integrate(ms_field(cfg.model), cfg.tau0, {start.rho, start.psi}, cfg.tau_max, icfg);
  const auto roots = find_roots(PhaseParams::from_model(cfg.model));
  const CaptureVerdict verdict = classify_trajectory(traj, cfg.model, roots);

  const fs::path dir = cfg.directory ? fs::path(*cfg.directory) : prepare_out_dir(g);
  fs::create_directories(dir);
  ParamEcho echo = model_echo(cfg.model);
  echo.emplace_back("tau0", fmt(cfg.tau0));
  echo.emplace_back("tau_max", fmt(cfg.tau_max));
  echo.emplace_back("rho_start", fmt(start.rho));
  echo.emplace_back("psi_start", fmt(start.psi));
  CsvFile csv("simulate", echo, {"tau", "rho", "psi"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    csv.row({fmt(traj.time(i)), fmt(traj.state(i)[0]), fmt(traj.state(i)[1])});
  }
  csv.write(dir / cfg.trajectory_csv);

  json doc;
  doc["tool"] = std::string("autores ") + kVersion;
  doc["command"] = "simulate";
  json params;
  for (const auto& [k, v] : echo) params[k] = v;
  doc["params"] = params;
  json v;
  v["kind"] = to_string(verdict.kind);
  if (verdict.kind == VerdictKind::Captured) {
    v["psi0_index"] = verdict.psi0_index;
    v["psi0_value"] = verdict.psi0_value;
  }
  v["final_tau"] = verdict.final_tau;
  v["max_drift"] = verdict.max_drift;
  v["mean_amp_ratio"] = verdict.mean_amp_ratio;
  v["singular"] = traj.singular();
  doc["verdict"] = v;
  write_json(dir / cfg.verdict_json, doc);
  return kExitOk;
}

struct BasinArgs {
  std::string config;
  double lambda = 1.0, nu = 0.0;
  MuFlags mu;
  double tau0 = 50.0, tau_max = 500.0;
  double rho_min = 1.0, rho_max = 10.0;
  std::size_t n_rho = 5;
  double psi_min = 0.0, psi_max = 6.0;
  std::size_t n_psi = 5;
};

int run_basin(const GlobalOptions& g, const BasinArgs& a) {
  ModelParams p;
  BasinGrid grid;
  double tau0 = a.tau0, tau_max = a.tau_max;
  fs::path dir;
  if (!a.config.empty()) {
    const ExperimentConfig cfg = parse_experiment_config(a.config);
    if (!cfg.scan) throw ConfigError("basin --config needs a 'scan' section");
    p = cfg.model;
    grid = *cfg.scan;
    tau0 = cfg.tau0;
    tau_max = cfg.tau_max;
    dir = cfg.directory ? fs::path(*cfg.directory) : prepare_out_dir(g);
    fs::create_directories(dir);
  } else {
    p.lambda = a.lambda;
    p.nu = a.nu;
    p.mu = a.mu.build();
    grid.rho_min = a.rho_min;
    grid.rho_max = a.rho_max;
    grid.n_rho = a.n_rho;
    grid.psi_min = a.psi_min;
    grid.psi_max = a.psi_max;
    grid.n_psi = a.n_psi;
    dir = prepare_out_dir(g);
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(p.lambda > 0.0)) throw ConfigError("basin scans require lambda > 0");
  if (!(tau0 > 0.0) || !(tau_max >= 4.0 * tau0)) {
    throw ConfigError("basin needs tau0 > 0 and tau_max >= 4*tau0");
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }

  const BasinResult result = basin_scan(p, tau0, grid, tau_max, CaptureCriteria{},
                                        g.resolve_workers(), 1e-8, 1e-10, g.max_steps);
  ParamEcho echo = model_echo(p);
  echo.emplace_back("tau0", fmt(tau0));
  echo.emplace_back("tau_max", fmt(tau_max));
  echo.emplace_back("rho_min", fmt(grid.rho_min));
  echo.emplace_back("rho_max", fmt(grid.rho_max));
  echo.emplace_back("n_rho", std::to_string(grid.n_rho));
  echo.emplace_back("psi_min", fmt(grid.psi_min));
  echo.emplace_back("psi_max", fmt(grid.psi_max));
  echo.emplace_back("n_psi", std::to_string(grid.n_psi));
  CsvFile csv("basin", echo,
              {"rho0", "psi0_init", "verdict", "psi0_locked", "tail_amp_ratio", "max_drift"});
  std::size_t n_captured = 0, n_escaped = 0, n_undetermined = 0;
  for (std::size_t i = 0; i < grid.n_rho; ++i) {
    for (std::size_t j = 0; j < grid.n_psi; ++j) {
      const CaptureVerdict& v = result.verdicts[i * grid.n_psi + j];
      switch (v.kind) {
        case VerdictKind::Captured: ++n_captured; break;
        case VerdictKind::Escaped: ++n_escaped; break;
        case VerdictKind::Undetermined: ++n_undetermined; break;
      }
      csv.row({fmt(grid.rho_at(i)), fmt(grid.psi_at(j)), to_string(v.kind),
               v.kind == VerdictKind::Captured ? fmt(v.psi0_value) : "",
               fmt(v.mean_amp_ratio), fmt(v.max_drift)});
    }
  }
  csv.write(dir / "basin.csv");
  std::cout << "captured=" << n_captured << " escaped=" << n_escaped
            << " undetermined=" << n_undetermined << " of " << result.verdicts.size()
            << " nodes\n";
  return kExitOk;
}

struct LyapunovArgs {
  double lambda = 1.0, nu = 0.0, delta = 0.0;
  double psi0 = std::acos(-1.0);
  double d0 = 0.02;
  double eta0 = 1e3, eta1 = 1e4;
  std::size_t samples = 2000;
};

ModelParams delta_model(double lambda, double nu, double delta) {
  ModelParams p;
  p.lambda = lambda;
  p.nu = nu;
  p.mu = delta == 0.0 ? MuSpec::zero() : MuSpec::series({delta / std::sqrt(lambda)});
  p.validate();
  return p;
}

int run_lyapunov_check(const GlobalOptions& g, const LyapunovArgs& a) {
  if (!(a.lambda > 0.0)) throw ConfigError("lyapunov check requires lambda > 0");
  if (!(a.eta1 > a.eta0) || !(a.eta0 > 0.0)) throw ConfigError("need 0 < eta0 < eta1");
  if (a.samples < 2) throw ConfigError("need at least 2 samples");
  ModelParams p;
  try {
    p = delta_model(a.lambda, a.nu, a.delta);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }

  const SeriesCoeffs c = compute_coeffs(p, a.psi0);
  const ScaledFrame frame = ScaledFrame::make(c);
  const double period = 2.0 * std::acos(-1.0) / frame.linear_frequency();
  if (!(a.eta0 > 2.0 * period)) throw ConfigError("eta0 must exceed two oscillation periods");
  const double tau_start = frame.tau_of_eta(a.eta0 - 2.0 * period);
  const double tau_end = frame.tau_of_eta(a.eta1 + 2.0 * period);
  const ModelState ref = eval_series(c, tau_start);
  const double angle = 0.7853981633974483;
  const ModelState start{
      ref.rho + frame.omega0() * std::pow(tau_start, -0.25) * a.d0 * std::cos(angle),
      ref.psi + a.d0 * std::sin(angle)};
  IntegrationConfig icfg = ms_capture_config(p, tau_end, 1e-11, 1e-13);
  icfg.max_steps = g.max_steps;
  const Trajectory traj =
      integrate(ms_field(p), tau_start, {start.rho, start.psi}, tau_end, icfg);
  const auto samples = lyapunov_along(traj, frame, a.eta0, a.eta1, a.samples);

  ParamEcho echo{{"lambda", fmt(a.lambda)}, {"nu", fmt(a.nu)},    {"delta", fmt(a.delta)},
                 {"psi0", fmt(a.psi0)},     {"d0", fmt(a.d0)},    {"eta0", fmt(a.eta0)},
                 {"eta1", fmt(a.eta1)},     {"samples", std::to_string(a.samples)}};
  CsvFile csv("lyapunov-check", echo, {"eta", "R", "Psi", "d", "V", "dVdeta"});
  for (const auto& s : samples) {
    csv.row({fmt(s.eta), fmt(s.r), fmt(s.psi), fmt(s.d), fmt(s.v), fmt(s.dv_deta)});
  }
  csv.write(prepare_out_dir(g) / "lyapunov_check.csv");
  return kExitOk;
}

struct FreqArgs {
  double lambda = 1.0, nu = 0.0, delta = 0.0;
  double psi0 = std::acos(-1.0);
  double h = std::numeric_limits<double>::quiet_NaN();
  double h_min = 1e-4, h_max = 1e-1;
  std::size_t n_h = 16;
};

int run_freq_check(const GlobalOptions& g, const FreqArgs& a) {
  if (!(a.lambda > 0.0)) throw ConfigError("freq check requires lambda > 0");
  ModelParams p;
  try {
    p = delta_model(a.lambda, a.nu, a.delta);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  const SeriesCoeffs c = compute_coeffs(p, a.psi0);
  const ScaledFrame frame = ScaledFrame::make(c);

  std::vector<double> hs;
  if (!std::isnan(a.h)) {
    hs.push_back(a.h);
  } else {
    if (a.n_h < 1) throw ConfigError("need n_h >= 1");
    // log-spaced energies
    for (std::size_t i = 0; i < a.n_h; ++i) {
      const double f = a.n_h == 1 ? 0.0 : static_cast<double>(i) / (a.n_h - 1);
      hs.push_back(a.h_min * std::pow(a.h_max / a.h_min, f));
    }
  }
  ParamEcho echo{{"lambda", fmt(a.lambda)}, {"nu", fmt(a.nu)}, {"delta", fmt(a.delta)},
                 {"psi0", fmt(a.psi0)}};
  CsvFile csv("freq-check", echo, {"h", "omega_num", "omega_formula"});
  for (double h : hs) {
    const double w_num = frozen_frequency(frame, h);
    const double w_formula = omega_formula(frame, h);
    csv.row({fmt(h), fmt(w_num), fmt(w_formula)});
    if (!std::isnan(a.h)) {
      std::cout << "h=" << fmt(h) << " omega_num=" << fmt(w_num)
                << " omega_formula=" << fmt(w_formula)
                << " omega_linear=" << fmt(frame.linear_frequency()) << "\n";
    }
  }
  csv.write(prepare_out_dir(g) / "frozen_frequency.csv");
  return kExitOk;
}

struct ThresholdArgs {
  double nu = 0.0, lambda = 1.0;
  double delta_min = 0.2, delta_max = 0.9;
  std::size_t n = 15;
  double track = 0.0;
};

int run_threshold_sweep(const GlobalOptions& g, const ThresholdArgs& a) {
  if (!(a.lambda > 0.0)) throw ConfigError("threshold sweep requires lambda > 0");
  if (a.n < 1) throw ConfigError("need n >= 1");
  try {
    PhaseParams{0.0, a.nu}.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  const auto deltas = linspace(a.delta_min, a.delta_max, a.n);
  ThresholdSweepOptions opts;
  opts.track_psi = a.track;
  const auto rows = threshold_sweep(a.nu, a.lambda, deltas, opts, g.resolve_workers());
  ParamEcho echo{{"nu", fmt(a.nu)},
                 {"lambda", fmt(a.lambda)},
                 {"delta_min", fmt(a.delta_min)},
                 {"delta_max", fmt(a.delta_max)},
                 {"n", std::to_string(a.n)},
                 {"track", fmt(a.track)},
                 {"delta_threshold", fmt(threshold_delta(a.nu))}};
  CsvFile csv("threshold-sweep", echo, {"delta", "p_prime", "algebraic", "dynamic", "agree"});
  for (const auto& row : rows) {
    csv.row({fmt(row.delta), fmt(row.p_prime), row.algebraic, row.dynamic,
             row.agree ? "1" : "0"});
  }
  csv.write(prepare_out_dir(g) / "threshold_sweep.csv");
  return kExitOk;
}

struct DuffingArgs {
  double eps = 1e-2, alpha = 0.25e-4, beta = 1.0, gamma = 1.0 / 6.0, nu = 0.0;
  double u0 = 0.1, v0 = 0.0;
  double t_max = 200.0;
  double horizon_c = 2.0;
};

int run_duffing(const GlobalOptions& g, const DuffingArgs& a) {
  DuffingParams p;
  p.eps = a.eps;
  p.alpha = a.alpha;
  p.beta = a.beta;
  p.gamma = a.gamma;
  p.nu = a.nu;
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(a.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  CompareOptions opts;
  opts.horizon_c = a.horizon_c;
  opts.max_steps = g.max_steps;
  const EnvelopeReport report = compare_envelope(p, a.u0, a.v0, a.t_max, opts);

  // Re-run the full oscillator once for the time-series dump.
  IntegrationConfig icfg;
  icfg.rel_tol = opts.rel_tol;
  icfg.abs_tol = opts.abs_tol;
  icfg.max_step = 0.25 * 2.0 * std::acos(-1.0);
  icfg.max_steps = g.max_steps;
  const Trajectory traj = integrate(duffing_field(p), 0.0, {a.u0, a.v0}, a.t_max, icfg);
  const DuffingObservables obs = observables(traj, p);

  const fs::path dir = prepare_out_dir(g);
  ParamEcho echo{{"eps", fmt(p.eps)},     {"alpha", fmt(p.alpha)}, {"beta", fmt(p.beta)},
                 {"gamma", fmt(p.gamma)}, {"nu", fmt(p.nu)},       {"u0", fmt(a.u0)},
                 {"v0", fmt(a.v0)},       {"t_max", fmt(a.t_max)}};
  CsvFile series("duffing", echo, {"t", "u", "v", "E", "Delta"});
  for (std::size_t i = 0; i < obs.t.size(); ++i) {
    series.row({fmt(obs.t[i]), fmt(obs.u[i]), fmt(obs.v[i]), fmt(obs.energy[i]),
                fmt(obs.delta[i])});
  }
  series.write(dir / "duffing.csv");

  CsvFile env("duffing", echo, {"t_window", "env_full", "env_model", "rel_err"});
  for (const auto& w : report.windows) {
    env.row({fmt(w.t_center), fmt(w.env_full), fmt(w.env_model), fmt(w.rel_err)});
  }
  env.write(dir / "duffing_envelope.csv");

  json doc;
  doc["tool"] = std::string("autores ") + kVersion;
  doc["command"] = "duffing";
  json params;
  for (const auto& [k, v] : echo) params[k] = v;
  doc["params"] = params;
  json rep;
  rep["captured"] = report.captured;
  rep["delta_band_final_half"] = report.delta_band;
  rep["delta_drift"] = report.delta_drift;
  rep["psi0_observed"] = report.psi0_observed;
  rep["energy_growth"] = report.energy_growth;
  rep["max_rel_env_err"] = report.max_rel_env_err;
  rep["model_ok"] = report.model_ok;
  json red;
  red["kappa"] = report.reduction.kappa;
  red["lambda"] = report.reduction.lambda;
  red["mu0"] = report.reduction.mu0;
  red["delta_model"] = report.reduction.delta_model;
  red["delta_conclusion"] = report.reduction.delta_conclusion;
  rep["reduction"] = red;
  doc["report"] = rep;
  write_json(dir / "duffing_report.json", doc);
  return kExitOk;
}

struct DemoEsArgs {
  double a0 = 1.0, b0 = 1.0;
  double t0 = 1.0, t1 = 16.0;
};

int run_demo_es(const GlobalOptions& g, const DemoEsArgs& a) {
  if (!(a.t0 > 0.0) || !(a.t1 > a.t0)) throw ConfigError("need 0 < t0 < t1");
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  IntegrationConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.max_steps = g.max_steps;
  const auto [a_start, b_start] = demo_es_exact(a.a0, a.b0, a.t0);
  const Trajectory traj = integrate(
      [](double t, std::span<const double> y, std::span<double> d) {
        const auto [da, db] = demo_es_rhs(t, y[0], y[1]);
        d[0] = da;
        d[1] = db;
      },
      a.t0, {a_start, b_start}, a.t1, cfg);

  ParamEcho echo{{"a0", fmt(a.a0)}, {"b0", fmt(a.b0)}, {"t0", fmt(a.t0)}, {"t1", fmt(a.t1)}};
  CsvFile csv("demo-es", echo, {"t", "a_num", "b_num", "a_exact", "b_exact"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.time(i);
    const auto [ae, be] = demo_es_exact(a.a0, a.b0, t);
    csv.row({fmt(t), fmt(traj.state(i)[0]), fmt(traj.state(i)[1]), fmt(ae), fmt(be)});
  }
  csv.write(prepare_out_dir(g) / "demo_es.csv");

  const auto y = traj.state(traj.size() - 1);
  const auto [ae, be] = demo_es_exact(a.a0, a.b0, a.t1);
  const double rel_err = std::hypot(y[0] - ae, y[1] - be) / std::hypot(ae, be);
  std::cout << "final a=" << fmt(y[0]) << " b=" << fmt(y[1]) << " exact a=" << fmt(ae)
            << " b=" << fmt(be) << " rel_err=" << fmt(rel_err) << "\n";
  return kExitOk;
}

struct AsymptoticsArgs {
  double lambda = 1.0, nu = 0.0;
  MuFlags mu;
  double psi0 = std::acos(-1.0);
  bool mu_index_alt = false;
  double tau_min = 1e2, tau_max = 1e5;
  std::size_t n_tau = 40;
};

int run_asymptotics(const GlobalOptions& g, const AsymptoticsArgs& a) {
  ModelParams p;
  p.lambda = a.lambda;
  p.nu = a.nu;
  p.mu = a.mu.build();
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(a.tau_min > 0.0) || !(a.tau_max > a.tau_min) || a.n_tau < 2) {
    throw ConfigError("need 0 < tau_min < tau_max and n_tau >= 2");
  }
  if (g.dry_run) {
    std::cout << "config ok\n";
    return kExitOk;
  }
  SeriesOptions opts;
  opts.mu_index_as_printed = !a.mu_index_alt;
  const SeriesCoeffs c = compute_coeffs(p, a.psi0, opts);

  ParamEcho echo = model_echo(p);
  echo.emplace_back("psi0", fmt(a.psi0));
  echo.emplace_back("mu_index_as_printed", opts.mu_index_as_printed ? "1" : "0");
  const fs::path dir = prepare_out_dir(g);
  CsvFile coeffs("asymptotics", echo,
                 {"psi0", "rho_m1", "rho2", "rho3", "psi1", "psi2", "psi3"});
  coeffs.row({fmt(c.psi0), fmt(c.rho_m1), fmt(c.rho2), fmt(c.rho3), fmt(c.psi1), fmt(c.psi2),
              fmt(c.psi3)});
  coeffs.write(dir / "asymptotics_coeffs.csv");

  CsvFile res("asymptotics", echo, {"tau", "r_rho", "r_psi"});
  for (std::size_t i = 0; i < a.n_tau; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(a.n_tau - 1);
    const double tau = a.tau_min * std::pow(a.tau_max / a.tau_min, f);
    const Residual r = residual(c, tau);
    res.row({fmt(tau), fmt(r.r_rho), fmt(r.r_psi)});
  }
  res.write(dir / "asymptotics_residual.csv");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoresonance capture laboratory"};
  app.require_subcommand(1);
  // Long-form flags only.
  app.set_help_flag("--help", "print help and exit");

  GlobalOptions g;
  app.add_option("--out-dir", g.out_dir, "output directory (default: $AUTORES_OUT_DIR or .)");
  app.add_option("--workers", g.workers, "worker threads for sweeps (default: hardware)");
  app.add_flag("--dry-run", g.dry_run, "validate the configuration without computing");
  app.add_option("--max-steps", g.max_steps, "integration step budget per run");

  EquilibriaArgs eq;
  auto* cmd_eq = app.add_subcommand("equilibria", "root table and region of the phase equation");
  cmd_eq->add_option("--delta", eq.delta, "combined excitation parameter");
  cmd_eq->add_option("--nu", eq.nu, "phase offset in [0, pi)");
  cmd_eq->add_option("--lambda", eq.lambda, "chirp rate (alternative to --delta)");
  eq.mu.attach(cmd_eq);

  ScanArgs scan;
  auto* cmd_scan = app.add_subcommand("bifurcation-scan", "root census over a (delta, nu) grid");
  cmd_scan->add_option("--delta-min", scan.delta_min, "grid lower delta");
  cmd_scan->add_option("--delta-max", scan.delta_max, "grid upper delta");
  cmd_scan->add_option("--n-delta", scan.n_delta, "grid points in delta");
  cmd_scan->add_option("--nu-min", scan.nu_min, "grid lower nu");
  cmd_scan->add_option("--nu-max", scan.nu_max, "grid upper nu");
  cmd_scan->add_option("--n-nu", scan.n_nu, "grid points in nu");

  std::string sim_config;
  auto* cmd_sim = app.add_subcommand("simulate", "one slow-flow run with a capture verdict");
  cmd_sim->add_option("--config", sim_config, "experiment config (JSON)")->required();

  BasinArgs basin;
  auto* cmd_basin = app.add_subcommand("basin", "capture verdicts over an initial-data grid");
  cmd_basin->add_option("--config", basin.config, "experiment config (JSON) with a scan section");
  cmd_basin->add_option("--lambda", basin.lambda, "chirp rate");
  cmd_basin->add_option("--nu", basin.nu, "phase offset");
  basin.mu.attach(cmd_basin);
  cmd_basin->add_option("--tau0", basin.tau0, "start time");
  cmd_basin->add_option("--tau-max", basin.tau_max, "end time (>= 4*tau0)");
  cmd_basin->add_option("--rho-min", basin.rho_min, "grid lower rho");
  cmd_basin->add_option("--rho-max", basin.rho_max, "grid upper rho");
  cmd_basin->add_option("--n-rho", basin.n_rho, "grid points in rho");
  cmd_basin->add_option("--psi-min", basin.psi_min, "grid lower psi");
  cmd_basin->add_option("--psi-max", basin.psi_max, "grid upper psi");
  cmd_basin->add_option("--n-psi", basin.n_psi, "grid points in psi");

  LyapunovArgs lyap;
  auto* cmd_lyap = app.add_subcommand("lyapunov-check",
                                      "V and dV/deta along a perturbed captured run");
  cmd_lyap->add_option("--lambda", lyap.lambda, "chirp rate");
  cmd_lyap->add_option("--nu", lyap.nu, "phase offset");
  cmd_lyap->add_option("--delta", lyap.delta, "combined excitation parameter");
  cmd_lyap->add_option("--psi0", lyap.psi0, "stable equilibrium phase");
  cmd_lyap->add_option("--d0", lyap.d0, "initial scaled distance");
  cmd_lyap->add_option("--eta0", lyap.eta0, "start of the eta window");
  cmd_lyap->add_option("--eta1", lyap.eta1, "end of the eta window");
  cmd_lyap->add_option("--samples", lyap.samples, "sample count");

  FreqArgs freq;
  auto* cmd_freq = app.add_subcommand("freq-check", "frozen-orbit frequency law omega(h)");
  cmd_freq->add_option("--lambda", freq.lambda, "chirp rate");
  cmd_freq->add_option("--nu", freq.nu, "phase offset");
  cmd_freq->add_option("--delta", freq.delta, "combined excitation parameter");
  cmd_freq->add_option("--psi0", freq.psi0, "stable equilibrium phase");
  cmd_freq->add_option("--h", freq.h, "single orbit energy (prints the result)");
  cmd_freq->add_option("--h-min", freq.h_min, "sweep lower energy");
  cmd_freq->add_option("--h-max", freq.h_max, "sweep upper energy");
  cmd_freq->add_option("--n-h", freq.n_h, "sweep point count");

  ThresholdArgs thr;
  auto* cmd_thr = app.add_subcommand("threshold-sweep",
                                     "algebraic vs dynamic stability across delta");
  cmd_thr->add_option("--nu", thr.nu, "phase offset");
  cmd_thr->add_option("--lambda", thr.lambda, "chirp rate");
  cmd_thr->add_option("--delta-min", thr.delta_min, "sweep lower delta");
  cmd_thr->add_option("--delta-max", thr.delta_max, "sweep upper delta");
  cmd_thr->add_option("--n", thr.n, "sweep point count");
  cmd_thr->add_option("--track", thr.track, "root branch to follow (psi value)");

  DuffingArgs duf;
  auto* cmd_duf = app.add_subcommand("duffing", "full oscillator run vs the reduced model");
  cmd_duf->add_option("--eps", duf.eps, "perturbation size");
  cmd_duf->add_option("--alpha", duf.alpha, "chirp coefficient");
  cmd_duf->add_option("--beta", duf.beta, "parametric pump amplitude");
  cmd_duf->add_option("--gamma", duf.gamma, "nonlinearity");
  cmd_duf->add_option("--nu", duf.nu, "phase offset");
  cmd_duf->add_option("--u0", duf.u0, "initial displacement");
  cmd_duf->add_option("--v0", duf.v0, "initial velocity");
  cmd_duf->add_option("--t-max", duf.t_max, "integration horizon");
  cmd_duf->add_option("--horizon-c", duf.horizon_c, "allowed horizon in units of 1/eps");

  DemoEsArgs des;
  auto* cmd_des = app.add_subcommand("demo-es", "demo system vs its closed-form solution");
  cmd_des->add_option("--a0", des.a0, "solution parameter a0");
  cmd_des->add_option("--b0", des.b0, "solution parameter b0");
  cmd_des->add_option("--t0", des.t0, "start time");
  cmd_des->add_option("--t1", des.t1, "end time");

  AsymptoticsArgs asy;
  auto* cmd_asy = app.add_subcommand("asymptotics", "series coefficients and residual table");
  cmd_asy->add_option("--lambda", asy.lambda, "chirp rate");
  cmd_asy->add_option("--nu", asy.nu, "phase offset");
  asy.mu.attach(cmd_asy);
  cmd_asy->add_option("--psi0", asy.psi0, "equilibrium phase (root of P)");
  cmd_asy->add_flag("--mu-index-alt", asy.mu_index_alt,
                    "couple the pump into psi2 via its second expansion coefficient");
  cmd_asy->add_option("--tau-min", asy.tau_min, "residual table lower tau");
  cmd_asy->add_option("--tau-max", asy.tau_max, "residual table upper tau");
  cmd_asy->add_option("--n-tau", asy.n_tau, "residual table point count");

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->set_help_flag("--help", "print help and exit");
    sub->fallthrough();  // global options may follow the subcommand
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (cmd_eq->parsed()) return run_equilibria(g, eq);
    if (cmd_scan->parsed()) return run_bifurcation_scan(g, scan);
    if (cmd_sim->parsed()) return run_simulate(g, sim_config);
    if (cmd_basin->parsed()) return run_basin(g, basin);
    if (cmd_lyap->parsed()) return run_lyapunov_check(g, lyap);
    if (cmd_freq->parsed()) return run_freq_check(g, freq);
    if (cmd_thr->parsed()) return run_threshold_sweep(g, thr);
    if (cmd_duf->parsed()) return run_duffing(g, duf);
    if (cmd_des->parsed()) return run_demo_es(g, des);
    if (cmd_asy->parsed()) return run_asymptotics(g, asy);
    std::cerr << "no subcommand selected\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
