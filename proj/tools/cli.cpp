#include "cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "sharpcal/calibration.hpp"
#include "sharpcal/errors.hpp"
#include "sharpcal/probe.hpp"
#include "sharpcal/scenarios.hpp"
#include "sharpcal/sharpness.hpp"

namespace sharpcal::cli {

namespace {

namespace fs = std::filesystem;

struct InputFile {
  std::string path;
  std::string content;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

InputFile read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return {path, os.str()};
}

nlohmann::json parse_json(const InputFile& f) {
  try {
    return nlohmann::json::parse(f.content);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + f.path + "': " + e.what());
  }
}

// Reproducibility record embedded in every report. The timestamp honours
// SOURCE_DATE_EPOCH so reruns can be byte-identical.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void add_input(const InputFile& f) { inputs_.push_back({{"path", f.path}, {"sha256", sha256_hex(f.content)}}); }
  void add_seed(std::uint64_t seed) { seeds_.push_back(seed); }
  void set_parameter(const std::string& key, nlohmann::json value) { parameters_[key] = std::move(value); }
  void set_tolerance(const std::string& key, double value) { tolerances_[key] = value; }

  nlohmann::json to_json() const {
    return {{"command", command_},
            {"inputs", inputs_},
            {"seeds", seeds_},
            {"parameters", parameters_},
            {"tool_version", kToolVersion},
            {"tolerances", tolerances_},
            {"timestamp", timestamp()}};
  }

 private:
  static std::string timestamp() {
    std::time_t t{};
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
      t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
      t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string command_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json seeds_ = nlohmann::json::array();
  nlohmann::json parameters_ = nlohmann::json::object();
  nlohmann::json tolerances_ = nlohmann::json::object();
};

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ParseError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

struct Options {
  std::string scenario;
  std::vector<std::string> scenarios;
  std::string validate_path;
  std::string out;
  std::string format;
  std::string reference;
  std::string generator;
  std::string config;
  std::string spec_path;
  std::string spec_json;
  std::string checkpoints = "2,8,32,128";
  std::size_t grid = 0;
  std::optional<double> tol;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::size_t bins = 20;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> basis;
  bool include_values = false;
};

class Runner {
 public:
  Runner(Options opts, std::ostream& out, std::ostream& err) : o_(std::move(opts)), out_(out), err_(err) {}

  int validate();
  int scenario_build();
  int calibration();
  int pit();
  int sharpness();
  int decompose();
  int theta();
  int asymptotic();
  int probe();
  int scan();
  int mc();

 private:
  Scenario load_scenario(Manifest& m, const std::string& path) {
    if (path.empty()) throw ArgumentError("--scenario is required");
    const auto f = read_file(path);
    m.add_input(f);
    return build_scenario(parse_json(f));
  }

  std::optional<double> tolerance() const {
    if (o_.tol) return o_.tol;
    if (const char* env = std::getenv("SHARPCAL_DEFAULT_TOL")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end == env || *end != '\0' || !(v > 0.0)) throw ParseError("SHARPCAL_DEFAULT_TOL is not a positive number");
      return v;
    }
    return std::nullopt;
  }

  CalibrationOptions calibration_options(Manifest& m, const Scenario& s) const {
    CalibrationOptions c;
    c.grid_size = o_.grid == 0 ? kDefaultCalibrationGrid : o_.grid;
    if (c.grid_size < 2) throw ArgumentError("--grid must be >= 2");
    c.tolerance = tolerance();
    m.set_parameter("grid", c.grid_size);
    m.set_tolerance("calibration", c.tolerance.value_or(default_calibration_tolerance(s)));
    return c;
  }

  std::uint64_t require_seed(Manifest& m) const {
    if (!o_.seed) throw ArgumentError("this subcommand requires an explicit --seed");
    m.add_seed(*o_.seed);
    return *o_.seed;
  }

  void emit_json(const Manifest& m, nlohmann::json report) {
    report["manifest"] = m.to_json();
    emit_text(report.dump(2) + "\n");
  }

  void emit_csv(const Manifest& m, const std::string& csv) {
    emit_text(csv);
    if (!o_.out.empty()) write_atomic(o_.out + ".manifest.json", m.to_json().dump(2) + "\n");
  }

  void emit_text(const std::string& text) {
    if (o_.out.empty()) {
      out_ << text;
    } else {
      write_atomic(o_.out, text);
    }
  }

  void summary(const std::string& line) { (o_.out.empty() ? err_ : out_) << line << '\n'; }

  const std::string& format_or(const std::string& fallback) const { return o_.format.empty() ? fallback : o_.format; }

  Options o_;
  std::ostream& out_;
  std::ostream& err_;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

const char* flag(bool b) { return b ? "true" : "false"; }

int Runner::validate() {
  const auto path = o_.validate_path.empty() ? o_.scenario : o_.validate_path;
  if (path.empty()) throw ArgumentError("validate needs a scenario file");
  const auto f = read_file(path);
  const auto problems = validate_scenario_json(parse_json(f));
  if (problems.empty()) {
    out_ << "valid: " << path << '\n';
    return kOk;
  }
  for (const auto& p : problems) err_ << "invalid: " << p << '\n';
  return kInvariantViolation;
}

int Runner::scenario_build() {
  Manifest m("scenario build");
  nlohmann::json spec;
  if (!o_.spec_path.empty()) {
    const auto f = read_file(o_.spec_path);
    m.add_input(f);
    spec = parse_json(f);
  } else if (!o_.spec_json.empty()) {
    spec = parse_json({"--spec-json", o_.spec_json});
    m.set_parameter("spec", spec);
  } else {
    throw ArgumentError("scenario build needs --spec or --spec-json");
  }
  const Scenario s = build_scenario(spec);
  // Scenario files stay loadable by every subcommand, so no manifest is embedded here.
  emit_text(s.to_json().dump(2) + "\n");
  summary("T=" + std::to_string(s.horizon()));
  return kOk;
}

int Runner::calibration() {
  Manifest m("calibration");
  const Scenario s = load_scenario(m, o_.scenario);
  const auto report = finite_calibration_residual(s, calibration_options(m, s));
  emit_json(m, report.to_json());
  summary("max_abs_residual=" + sci(report.max_abs_residual) + " calibrated=" + flag(report.calibrated));
  return kOk;
}

int Runner::pit() {
  Manifest m("pit");
  const Scenario s = load_scenario(m, o_.scenario);
  const auto seed = require_seed(m);
  if (o_.n < 1) throw ArgumentError("--n must be >= 1");
  if (o_.bins < 1) throw ArgumentError("--bins must be >= 1");
  m.set_parameter("n", o_.n);
  m.set_parameter("bins", o_.bins);
  m.set_tolerance("ks_critical", kKsCritical5Percent);
  const auto sample = sample_randomized_pit(s, o_.n, seed);
  const auto counts = pit_histogram(sample, o_.bins);
  const auto& fmt = format_or("csv");
  if (fmt == "csv") {
    emit_csv(m, histogram_csv(counts));
  } else {
    auto j = sample.to_json(o_.include_values);
    j["histogram"] = counts;
    emit_json(m, std::move(j));
  }
  summary("ks=" + sci(sample.ks_statistic) + " threshold=" + sci(sample.ks_threshold) + " reject=" + flag(sample.reject));
  return kOk;
}

int Runner::sharpness() {
  Manifest m("sharpness");
  const Scenario s = load_scenario(m, o_.scenario);
  SharpnessOptions opts;
  opts.calibration = calibration_options(m, s);
  m.set_tolerance("equality", opts.equality_tolerance);
  m.set_tolerance("inequality", kInequalityTolerance);
  try {
    const auto report = verify_sharpness(s, opts);
    emit_json(m, report.to_json());
    summary("gap=" + sci(report.gap) + " calibrated=true equality_condition_met=" +
            flag(report.equality_condition_met));
    return kOk;
  } catch (const NotCalibrated& e) {
    emit_json(m, e.report().to_json());
    summary("max_abs_residual=" + sci(e.report().max_abs_residual) + " calibrated=false");
    err_ << "error: " << e.what() << '\n';
    return kNotCalibrated;
  }
}

int Runner::decompose() {
  Manifest m("decompose");
  const Scenario s = load_scenario(m, o_.scenario);
  const auto report = sharpcal::decompose(s);
  emit_json(m, report.to_json());
  summary("var_H_z=" + sci(report.z.var_h_z) + " var_H_u_formula=" + sci(report.u.var_h_u_formula) +
          " gap=" + sci(report.gap));
  return kOk;
}

int Runner::theta() {
  Manifest m("theta");
  const Scenario s = load_scenario(m, o_.scenario);
  const std::size_t grid = o_.grid == 0 ? kDefaultThetaGrid : o_.grid;
  m.set_parameter("grid", grid);
  std::optional<ThetaProfile> ref;
  if (!o_.reference.empty()) {
    const auto f = read_file(o_.reference);
    m.add_input(f);
    auto j = parse_json(f);
    ref = ThetaProfile::from_json(j);
  }
  const auto profile = theta_profile(s, grid, ref ? &*ref : nullptr);
  emit_json(m, profile.to_json());
  summary(profile.sup_deviation ? "sup_deviation=" + sci(*profile.sup_deviation) : "points=" + std::to_string(grid));
  return kOk;
}

std::vector<std::size_t> parse_checkpoints(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ArgumentError("bad checkpoint '" + item + "'");
    }
  }
  if (out.empty()) throw ArgumentError("--checkpoints is empty");
  return out;
}

int Runner::asymptotic() {
  Manifest m("asymptotic");
  ScenarioGenerator gen;
  if (!o_.generator.empty()) {
    const auto f = read_file(o_.generator);
    m.add_input(f);
    gen = generator_from_json(parse_json(f));
  } else if (!o_.scenario.empty()) {
    const Scenario base = load_scenario(m, o_.scenario);
    gen = [base](std::size_t t) { return make_block_repeat(base, t); };
  } else {
    throw ArgumentError("asymptotic needs --generator or --scenario (block base)");
  }
  const auto checkpoints = parse_checkpoints(o_.checkpoints);
  const std::size_t grid = o_.grid == 0 ? kDefaultThetaGrid : o_.grid;
  m.set_parameter("checkpoints", checkpoints);
  m.set_parameter("grid", grid);
  m.set_tolerance("asymptotic_slack", kAsymptoticSlack);
  const auto check = asymptotic_check(gen, checkpoints, grid);
  if (format_or("json") == "csv") {
    emit_csv(m, check.to_csv());
  } else {
    CalibrationOptions copts;
    copts.tolerance = tolerance();
    auto j = check.to_json();
    j["calibration_trend"] = asymptotic_calibration_trend(gen, checkpoints, copts).to_json();
    emit_json(m, std::move(j));
  }
  summary(std::string("inequality_holds_asymptotically=") + flag(check.inequality_holds_asymptotically) +
          " theta_stable=" + flag(check.theta_stable));
  return kOk;
}

int Runner::probe() {
  Manifest m("probe");
  if (o_.config.empty()) throw ArgumentError("probe needs --config");
  const auto f = read_file(o_.config);
  m.add_input(f);
  const auto cfg = parse_json(f);
  if (!cfg.is_object() || !cfg.contains("truths") || !cfg.at("truths").is_array()) {
    throw ParseError("probe config needs a 'truths' array");
  }
  std::vector<Distribution> truths;
  for (const auto& d : cfg.at("truths")) truths.push_back(distribution_from_json(d));

  ProbeOptions opts;
  try {
    opts.budget = o_.budget.value_or(cfg.value("budget", std::size_t{500}));
    opts.basis_size = o_.basis.value_or(cfg.value("basis_size", kDefaultBasisSize));
    opts.grid_size = o_.grid != 0 ? o_.grid : cfg.value("grid", kDefaultCompletionGrid);
    if (o_.seed) {
      opts.seed = *o_.seed;
    } else if (cfg.contains("seed")) {
      opts.seed = cfg.at("seed").get<std::uint64_t>();
    } else {
      throw ArgumentError("probe requires an explicit seed (--seed or config 'seed')");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("probe config: ") + e.what());
  }
  m.add_seed(opts.seed);
  m.set_parameter("budget", opts.budget);
  m.set_parameter("basis_size", opts.basis_size);
  m.set_parameter("grid", opts.grid_size);
  m.set_tolerance("calibration", kTabulatedCalibrationTolerance);
  m.set_tolerance("gap", kProbeGapTolerance);
  const auto result = minimize_sharpness(truths, opts);
  emit_json(m, result.to_json());
  summary("best_avg_var_F=" + sci(result.best_avg_var_f) + " margin=" + sci(result.margin_vs_avg_var_g) +
          " feasible=" + std::to_string(result.feasible) + " all_calibrated=" + flag(result.all_candidates_calibrated));
  return kOk;
}

int Runner::scan() {
  Manifest m("scan");
  std::vector<std::pair<std::string, Scenario>> items;
  auto paths = o_.scenarios;
  if (!o_.scenario.empty()) paths.insert(paths.begin(), o_.scenario);
  for (const auto& p : paths) items.emplace_back(fs::path(p).stem().string(), load_scenario(m, p));
  SharpnessOptions opts;
  opts.calibration.tolerance = tolerance();
  m.set_tolerance("equality", opts.equality_tolerance);
  m.set_tolerance("tension_gap", kTensionGap);
  const auto table = equality_gap_scan(items, opts);
  if (format_or("json") == "csv") {
    emit_csv(m, table.to_csv());
  } else {
    emit_json(m, table.to_json());
  }
  const auto tensions = std::count_if(table.rows.begin(), table.rows.end(), [](const ScanRow& r) { return r.tension; });
  summary("rows=" + std::to_string(table.rows.size()) + " tensions=" + std::to_string(tensions));
  return kOk;
}

int Runner::mc() {
  Manifest m("mc");
  const Scenario s = load_scenario(m, o_.scenario);
  const auto seed = require_seed(m);
  const std::size_t n = o_.n == 0 ? 1'000'000 : o_.n;
  m.set_parameter("n", n);
  m.set_parameter("bins", o_.bins);
  try {
    const auto report = mc_oracle(s, n, o_.bins, seed);
    if (format_or("json") == "csv") {
      emit_csv(m, report.conditional_csv());
    } else {
      emit_json(m, report.to_json());
    }
    summary("var_H_mc=" + sci(report.var_h_mc) + " se=" + sci(report.var_h_mc_se) + " var_H_z=" + sci(report.var_h_z));
    return kOk;
  } catch (const NotCalibrated& e) {
    emit_json(m, e.report().to_json());
    err_ << "error: " << e.what() << '\n';
    return kNotCalibrated;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibration and sharpness diagnostics for probabilistic forecasts", "sharpcal"};
  app.require_subcommand(1);
  Options o;

  auto add_scenario = [&](CLI::App* sub) { return sub->add_option("--scenario", o.scenario, "Scenario JSON file"); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Report path (default: stdout)"); };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_tol = [&](CLI::App* sub) { sub->add_option("--tol", o.tol, "Calibration tolerance")->check(CLI::PositiveNumber); };
  auto add_grid = [&](CLI::App* sub, std::size_t min) {
    sub->add_option("--grid", o.grid, "Grid size")->check(CLI::Range(min, std::numeric_limits<std::size_t>::max()));
  };
  auto add_seed = [&](CLI::App* sub) { return sub->add_option("--seed", o.seed, "Random seed (mandatory)"); };

  auto* validate = app.add_subcommand("validate", "Check scenario invariants");
  validate->add_option("file", o.validate_path, "Scenario JSON file");
  add_scenario(validate);

  auto* scenario = app.add_subcommand("scenario", "Scenario construction");
  auto* build = scenario->add_subcommand("build", "Build a scenario from a family spec");
  scenario->require_subcommand(1);
  build->add_option("--spec", o.spec_path, "Scenario spec JSON file");
  build->add_option("--spec-json", o.spec_json, "Inline scenario spec JSON");
  add_out(build);

  auto* calibration = app.add_subcommand("calibration", "Finite calibration residuals");
  add_scenario(calibration)->required();
  add_grid(calibration, 2);
  add_tol(calibration);
  add_out(calibration);
  add_format(calibration);

  auto* pit = app.add_subcommand("pit", "Randomized PIT sample and histogram");
  add_scenario(pit)->required();
  pit->add_option("--n", o.n, "Sample count")->required()->check(CLI::PositiveNumber);
  add_seed(pit)->required();
  pit->add_option("--bins", o.bins, "Histogram bins")->check(CLI::PositiveNumber);
  pit->add_flag("--include-values", o.include_values, "Embed raw PIT values in JSON output");
  add_out(pit);
  add_format(pit);

  auto* sharp = app.add_subcommand("sharpness", "Variance decompositions under calibration");
  add_scenario(sharp)->required();
  add_grid(sharp, 2);
  add_tol(sharp);
  add_out(sharp);
  add_format(sharp);

  auto* decomp = app.add_subcommand("decompose", "Variance decompositions without the calibration check");
  add_scenario(decomp)->required();
  add_out(decomp);
  add_format(decomp);

  auto* theta = app.add_subcommand("theta", "Averaged squared quantile profile");
  add_scenario(theta)->required();
  add_grid(theta, 1);
  theta->add_option("--reference", o.reference, "Reference theta profile JSON");
  add_out(theta);
  add_format(theta);

  auto* asym = app.add_subcommand("asymptotic", "Checkpoint sweep over a scenario generator");
  asym->add_option("--generator", o.generator, "Generator spec JSON");
  add_scenario(asym);
  asym->add_option("--checkpoints", o.checkpoints, "Comma-separated increasing horizons");
  add_grid(asym, 1);
  add_tol(asym);
  add_out(asym);
  add_format(asym);

  auto* probe = app.add_subcommand("probe", "Calibration-constrained sharpness search");
  probe->add_option("--config", o.config, "Probe config JSON")->required();
  probe->add_option("--budget", o.budget, "Candidate evaluations")->check(CLI::PositiveNumber);
  add_seed(probe);
  probe->add_option("--basis", o.basis, "Sine basis size")->check(CLI::PositiveNumber);
  add_grid(probe, 2);
  add_out(probe);
  add_format(probe);

  auto* scan = app.add_subcommand("scan", "Equality-condition scan over scenarios");
  add_scenario(scan);
  scan->add_option("scenarios", o.scenarios, "Additional scenario files");
  add_tol(scan);
  add_out(scan);
  add_format(scan);

  auto* mc = app.add_subcommand("mc", "Monte Carlo oracle for the randomized construction");
  add_scenario(mc)->required();
  mc->add_option("--n", o.n, "Sample count (>= 10000)")->check(CLI::Range(std::size_t{10'000}, std::numeric_limits<std::size_t>::max()));
  add_seed(mc)->required();
  mc->add_option("--bins", o.bins, "U bins")->check(CLI::PositiveNumber);
  add_out(mc);
  add_format(mc);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }

  Runner runner(o, out, err);
  try {
    if (*validate) return runner.validate();
    if (*build) return runner.scenario_build();
    if (*calibration) return runner.calibration();
    if (*pit) return runner.pit();
    if (*sharp) return runner.sharpness();
    if (*decomp) return runner.decompose();
    if (*theta) return runner.theta();
    if (*asym) return runner.asymptotic();
    if (*probe) return runner.probe();
    if (*scan) return runner.scan();
    if (*mc) return runner.mc();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const NotCalibrated& e) {
    err << "error: " << e.what() << '\n';
    return kNotCalibrated;
  } catch (const SearchFailure& e) {
    err << "error: " << e.what() << '\n';
    return kSearchFailure;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const UnsupportedDistribution& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }
  err << "error: no subcommand\n";
  return kParseError;
}

}  // namespace sharpcal::cli
