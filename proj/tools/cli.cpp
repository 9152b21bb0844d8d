#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ustat/conditions.hpp"
#include "ustat/config.hpp"
#include "ustat/depgraph.hpp"
#include "ustat/error.hpp"
#include "ustat/json_format.hpp"
#include "ustat/kernel.hpp"
#include "ustat/mc.hpp"
#include "ustat/process.hpp"
#include "ustat/rng.hpp"
#include "ustat/statistic.hpp"

namespace ustat::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
  std::size_t jobs = 1;
  bool dry_run = false;
};

struct Context {
  const Options& opt;
  Json config;  // resolved, echoed into every output
  std::ostream& out;
  std::ostream& err;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents

  void log(int level, const std::string& msg) const {
    if (opt.verbosity >= level) out << msg << '\n';
  }
};

std::string g(double v) { return format_double(v); }

std::string config_line(const Json& config) { return "# config: " + dump_json(config, -1) + "\n"; }

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON in config: ") + e.what());
  }
}

Mode mode_of(const Json& j) { return parse_mode(get_string_or(j, "mode", "U", "config")); }

std::uint64_t seed_of(const Json& j) {
  const auto& v = j.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ConfigError("config.seed must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

// Seeded commands always carry a seed in the resolved config.
void resolve_seed(Json& config, const Options& opt) {
  if (opt.seed) config["seed"] = *opt.seed;
  if (!config.contains("seed")) config["seed"] = 0;
  seed_of(config);
}

// ---------------------------------------------------------------- beta

void cmd_beta(Context& ctx) {
  auto& c = ctx.config;
  check_keys(c, {"process", "t_max"}, "config");
  const ProcessSpec spec = parse_process(c.at("process"));
  const std::size_t t_max = get_size(c, "t_max", "config");
  if (t_max == 0) throw ConfigError("config.t_max must be positive");
  c["process"] = process_to_json(spec);
  if (ctx.opt.dry_run) return;
  std::string csv = config_line(c) + "t,beta,exactness\n";
  for (std::size_t t = 1; t <= t_max; ++t) {
    const auto b = beta_coefficient(spec, t);
    csv += fmt::format("{},{},{}\n", t, g(b.value), to_string(b.exactness));
  }
  ctx.files.emplace_back("beta.csv", std::move(csv));
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(Context& ctx) {
  auto& c = ctx.config;
  resolve_seed(c, ctx.opt);
  check_keys(c, {"process", "n", "paths", "seed"}, "config");
  const ProcessSpec spec = parse_process(c.at("process"));
  const std::size_t n = get_size(c, "n", "config");
  const std::size_t paths = get_size_or(c, "paths", 1, "config");
  if (n == 0 || paths == 0) throw ConfigError("config.n and config.paths must be positive");
  c["process"] = process_to_json(spec);
  c["paths"] = paths;
  if (ctx.opt.dry_run) return;
  const std::uint64_t seed = seed_of(c);
  std::string csv = config_line(c) + "path,t,x\n";
  for (std::size_t i = 0; i < paths; ++i) {
    // Same stream as replicate i of the Monte Carlo harness at this n.
    Rng rng(seed, {n, i});
    const auto x = sample_path(spec, n, rng);
    for (std::size_t t = 0; t < n; ++t) csv += fmt::format("{},{},{}\n", i, t + 1, g(x[t]));
  }
  ctx.files.emplace_back("paths.csv", std::move(csv));
}

// ---------------------------------------------------------------- stat

void cmd_stat(Context& ctx) {
  auto& c = ctx.config;
  resolve_seed(c, ctx.opt);
  check_keys(c, {"process", "kernel", "mode", "n", "replicates", "seed", "sigma2_lags"}, "config");
  ExperimentConfig e;
  e.spec = parse_process(c.at("process"));
  e.kernel = parse_kernel(c.at("kernel"));
  e.mode = mode_of(c);
  const std::size_t n = get_size(c, "n", "config");
  e.replicates = get_size_or(c, "replicates", 1, "config");
  e.seed = seed_of(c);
  if (n == 0 || e.replicates == 0) throw ConfigError("config.n and config.replicates must be positive");
  if (e.mode == Mode::U && n < e.kernel.order()) throw ConfigError("U-statistics need n >= kernel order");
  c["process"] = process_to_json(*e.spec);
  c["mode"] = to_string(e.mode);
  c["replicates"] = e.replicates;
  std::optional<std::size_t> lags;
  if (c.contains("sigma2_lags")) lags = get_size(c, "sigma2_lags", "config");
  if (ctx.opt.dry_run) return;

  const auto values = simulate_statistics(e, n, ctx.opt.jobs);
  std::string csv = config_line(c) + "replicate,n,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) csv += fmt::format("{},{},{}\n", i, n, g(values[i]));
  ctx.files.emplace_back("stat.csv", std::move(csv));

  if (lags) {
    ProjectionOptions po;
    po.seed = e.seed;
    Sigma2Options so;
    so.seed = e.seed;
    const auto proj = hoeffding_projection(*e.spec, e.kernel, po);
    const auto s = yoshihara_sigma2(*e.spec, proj, *lags, so);
    std::string sc = config_line(c) +
                     "theta,theta_se,sigma2,sigma2_se,variance_term,lag_cutoff,tail_bound,tolerance,tail_warning\n";
    sc += fmt::format("{},{},{},{},{},{},{},{},{}\n", g(proj.theta), g(proj.theta_se), g(s.value),
                      g(s.standard_error), g(s.variance_term), s.lag_cutoff, g(s.tail_bound), g(s.tolerance),
                      s.tail_warning ? "true" : "false");
    ctx.files.emplace_back("sigma2.csv", std::move(sc));
  }
}

// ---------------------------------------------------------------- graph-audit

bool cmd_graph_audit(Context& ctx) {
  auto& c = ctx.config;
  check_keys(c, {"n", "r", "m", "modes"}, "config");
  const auto ns = get_size_array(c, "n", "config");
  const auto rs = get_size_array(c, "r", "config");
  const auto ms = get_size_array(c, "m", "config");
  std::vector<Mode> modes{Mode::U, Mode::V};
  if (c.contains("modes")) {
    if (!c.at("modes").is_array()) throw ConfigError("config.modes must be an array");
    modes.clear();
    for (const auto& m : c.at("modes")) {
      if (!m.is_string()) throw ConfigError("config.modes entries must be strings");
      modes.push_back(parse_mode(m.get<std::string>()));
    }
  }
  Json echo_modes = Json::array();
  for (Mode m : modes) echo_modes.push_back(to_string(m));
  c["modes"] = echo_modes;
  if (ns.empty() || rs.empty() || ms.empty() || modes.empty()) throw ConfigError("audit grids must be nonempty");
  for (auto r : rs) {
    if (r == 0) throw ConfigError("config.r entries must be positive");
  }
  if (ctx.opt.dry_run) return true;

  const auto rows = audit_neighborhoods(ns, rs, ms, modes, ctx.opt.jobs);
  std::string csv = config_line(c) + "mode,n,r,m,vertices,max_count,min_count,bound,ratio,violations\n";
  std::size_t violations = 0;
  for (const auto& row : rows) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(row.mode), row.n, row.r, row.m, row.vertices,
                       row.max_count, row.min_count, g(row.bound), g(row.ratio()), row.violations);
    violations += row.violations;
  }
  ctx.files.emplace_back("graph_audit.csv", std::move(csv));
  if (violations > 0) ctx.err << "graph-audit: " << violations << " neighborhood bound violations\n";
  return violations == 0;
}

// ---------------------------------------------------------------- conditions

bool cmd_conditions(Context& ctx) {
  auto& c = ctx.config;
  check_keys(c,
             {"r", "kappa", "b0", "R", "threshold", "mode", "n_grid", "b_grid", "bound", "variance", "mixing",
              "require_decreasing"},
             "config");
  RateModel model;
  model.r = get_size_or(c, "r", 2, "config");
  model.kappa = get_number(c, "kappa", "config");
  const double bound = get_number_or(c, "bound", 1.0, "config");
  if (!(bound > 0.0)) throw ConfigError("config.bound must be positive");
  model.bound = [bound](double) { return bound; };

  const Json& var = c.at("variance");
  check_keys(var, {"constant", "measured", "provenance"}, "config.variance");
  if (var.contains("constant")) model.variance_constant = get_number(var, "constant", "config.variance");
  if (var.contains("measured")) {
    const auto& rows = var.at("measured");
    if (!rows.is_array()) throw ConfigError("config.variance.measured must be an array");
    for (const auto& row : rows) {
      check_keys(row, {"n", "D"}, "config.variance.measured entry");
      model.measured_variance[get_size(row, "n", "measured")] = get_number(row, "D", "measured");
    }
    model.variance_provenance = "measured";
  }
  model.variance_provenance = get_string_or(var, "provenance", model.variance_provenance, "config.variance");

  const Json& mix = c.at("mixing");
  check_keys(mix, {"rate", "scale", "process"}, "config.mixing");
  if (mix.contains("rate") == mix.contains("process")) {
    throw ConfigError("config.mixing needs exactly one of 'rate' or 'process'");
  }
  if (mix.contains("rate")) {
    model.rate = rate_function(get_string_or(mix, "rate", "log", "config.mixing"),
                               get_number_or(mix, "scale", 1.0, "config.mixing"));
  } else {
    model.beta = BetaProfile::from_process(parse_process(mix.at("process")));
  }

  Theorem2Options o;
  o.b0 = get_number_or(c, "b0", 2.0 / 3.0, "config");
  o.R = get_size_or(c, "R", 1, "config");
  o.threshold = get_number_or(c, "threshold", 0.1, "config");
  o.mode = mode_of(c);
  const auto n_grid = get_number_array(c, "n_grid", "config");
  const auto b_grid = get_number_array(c, "b_grid", "config");
  const bool require = get_bool_or(c, "require_decreasing", false, "config");
  c["b0"] = o.b0;
  c["R"] = o.R;
  c["threshold"] = o.threshold;
  c["mode"] = to_string(o.mode);
  c["r"] = model.r;
  c["bound"] = bound;
  model.validate();
  // Reject the schedule before anything else, also in dry runs.
  if (!n_grid.empty()) block_schedule(n_grid.front(), model.kappa, o.b0);
  if (ctx.opt.dry_run) return true;

  const auto report = theorem2_check(model, n_grid, b_grid, o);
  Json j;
  j["config"] = c;
  j["verdict"] = to_string(report.verdict);
  j["variance_provenance"] = report.variance_provenance;
  j["warnings"] = report.warnings;
  Json pts = Json::array();
  for (const auto& p : report.points) {
    pts.push_back({{"n", p.n},
                   {"b", p.b},
                   {"m_n", p.m_n},
                   {"variance", p.variance},
                   {"beta_m", p.beta_m},
                   {"T1", p.theorem1.first},
                   {"T2", p.theorem1.second},
                   {"reduced_first", p.reduced.first},
                   {"reduced_second", p.reduced.second},
                   {"tc_first", p.tc.first},
                   {"tc_second", p.tc.second},
                   {"gamma", p.gamma},
                   {"gamma_out_of_range", p.gamma_out_of_range}});
  }
  j["points"] = pts;
  Json seqs = Json::array();
  for (const auto& s : report.sequences) seqs.push_back({{"term", s.term}, {"b", s.b}, {"verdict", to_string(s.verdict)}});
  j["sequences"] = seqs;
  Json ex = Json::array();
  for (const auto& e : report.exponents) ex.push_back({{"b", e.b}, {"analytic", e.analytic}, {"fitted", e.fitted}});
  j["exponents"] = ex;
  ctx.files.emplace_back("conditions.json", dump_json(j) + "\n");

  std::string csv = config_line(c) +
                    "n,b,m_n,T1,T2,verdict,variance,beta_m,reduced_first,reduced_second,tc_first,tc_second,gamma\n";
  for (const auto& p : report.points) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", g(p.n), g(p.b), p.m_n, g(p.theorem1.first),
                       g(p.theorem1.second), to_string(report.verdict), g(p.variance), g(p.beta_m),
                       g(p.reduced.first), g(p.reduced.second), g(p.tc.first), g(p.tc.second), g(p.gamma));
  }
  ctx.files.emplace_back("conditions.csv", std::move(csv));
  for (const auto& w : report.warnings) ctx.err << "conditions: warning: " << w << '\n';
  return !require || report.verdict == Verdict::decreasing;
}

// ---------------------------------------------------------------- verify-clt

struct ThresholdCheck {
  std::string name;
  Json limit;
  Json observed;
  bool pass = false;
};

std::vector<ThresholdCheck> evaluate_thresholds(const Json& t, const ExperimentResult& r) {
  check_keys(t,
             {"ks_final_max", "ks_strictly_decreasing", "ks_top_half_decreasing", "m3_abs_max", "m4_abs_dev_max",
              "kappa_hat_min", "kappa_hat_max", "ks_final_min"},
             "config.thresholds");
  std::vector<ThresholdCheck> out;
  const auto& last = r.per_n.back();
  auto moment = [&](std::size_t k) {
    for (const auto& m : last.standardized_moments) {
      if (m.k == k) return m.value;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  auto decreasing_from = [&](std::size_t start) {
    for (std::size_t i = start + 1; i < r.per_n.size(); ++i) {
      if (!(r.per_n[i].ks < r.per_n[i - 1].ks)) return false;
    }
    return true;
  };
  // NaN observations (degenerate grid points) fail every numeric check.
  if (t.contains("ks_final_max")) {
    const double lim = get_number(t, "ks_final_max", "thresholds");
    out.push_back({"ks_final_max", lim, last.ks, last.ks <= lim});
  }
  if (t.contains("ks_final_min")) {
    const double lim = get_number(t, "ks_final_min", "thresholds");
    out.push_back({"ks_final_min", lim, last.ks, last.ks >= lim});
  }
  if (get_bool_or(t, "ks_strictly_decreasing", false, "thresholds")) {
    const bool ok = decreasing_from(0);
    out.push_back({"ks_strictly_decreasing", true, ok, ok});
  }
  if (get_bool_or(t, "ks_top_half_decreasing", false, "thresholds")) {
    const bool ok = decreasing_from(r.per_n.size() / 2);
    out.push_back({"ks_top_half_decreasing", true, ok, ok});
  }
  if (t.contains("m3_abs_max")) {
    const double lim = get_number(t, "m3_abs_max", "thresholds");
    const double v = std::abs(moment(3));
    out.push_back({"m3_abs_max", lim, v, v <= lim});
  }
  if (t.contains("m4_abs_dev_max")) {
    const double lim = get_number(t, "m4_abs_dev_max", "thresholds");
    const double v = std::abs(moment(4) - 3.0);
    out.push_back({"m4_abs_dev_max", lim, v, v <= lim});
  }
  const double kappa = r.scaling ? r.scaling->kappa_hat : std::numeric_limits<double>::quiet_NaN();
  if (t.contains("kappa_hat_min")) {
    const double lim = get_number(t, "kappa_hat_min", "thresholds");
    out.push_back({"kappa_hat_min", lim, kappa, kappa >= lim});
  }
  if (t.contains("kappa_hat_max")) {
    const double lim = get_number(t, "kappa_hat_max", "thresholds");
    out.push_back({"kappa_hat_max", lim, kappa, kappa <= lim});
  }
  return out;
}

bool cmd_verify_clt(Context& ctx) {
  auto& c = ctx.config;
  resolve_seed(c, ctx.opt);
  check_keys(c,
             {"process", "kernel", "mode", "n_grid", "replicates", "seed", "centering", "moment_orders",
              "jackknife_blocks", "oracle_budget", "scaling_flag_threshold", "record_timing", "thresholds"},
             "config");
  ExperimentConfig e;
  e.spec = parse_process(c.at("process"));
  e.kernel = parse_kernel(c.at("kernel"));
  e.mode = mode_of(c);
  e.n_grid = get_size_array(c, "n_grid", "config");
  e.replicates = get_size_or(c, "replicates", e.replicates, "config");
  e.seed = seed_of(c);
  e.centering = parse_centering(get_string_or(c, "centering", "auto", "config"));
  e.moment_orders = get_size_or(c, "moment_orders", e.moment_orders, "config");
  e.jackknife_blocks = get_size_or(c, "jackknife_blocks", e.jackknife_blocks, "config");
  e.oracle_budget = get_size_or(c, "oracle_budget", e.oracle_budget, "config");
  e.scaling_flag_threshold = get_number_or(c, "scaling_flag_threshold", e.scaling_flag_threshold, "config");
  const bool timing = get_bool_or(c, "record_timing", false, "config");
  const Json thresholds = c.contains("thresholds") ? c.at("thresholds") : Json::object();
  require_object(thresholds, "config.thresholds");
  e.validate();

  c["process"] = process_to_json(*e.spec);
  c["mode"] = to_string(e.mode);
  c["replicates"] = e.replicates;
  c["centering"] = to_string(e.centering);
  c["moment_orders"] = e.moment_orders;
  c["jackknife_blocks"] = e.jackknife_blocks;
  c["oracle_budget"] = e.oracle_budget;
  c["scaling_flag_threshold"] = e.scaling_flag_threshold;
  c["record_timing"] = timing;
  c["thresholds"] = thresholds;

  if (ctx.opt.dry_run) {
    for (std::size_t n : e.n_grid) {
      const auto outcomes = path_outcome_count(*e.spec, n);
      const bool affordable = outcomes && *outcomes <= e.oracle_budget;
      const char* centering = e.centering == Centering::automatic ? (affordable ? "exact_oracle" : "estimated")
                                                                  : to_string(e.centering);
      ctx.out << fmt::format("plan: n={} replicates={} centering={}\n", n, e.replicates, centering);
    }
    return true;
  }

  const auto result = run_experiment(e, ctx.opt.jobs);
  const auto checks = evaluate_thresholds(thresholds, result);
  bool passed = true;
  for (const auto& ch : checks) passed = passed && ch.pass;

  auto seconds = [&](const GridResult& gr) -> Json { return timing ? Json(gr.seconds) : Json(nullptr); };
  Json j;
  j["config"] = c;
  Json per = Json::array();
  for (const auto& gr : result.per_n) {
    Json moments = Json::array();
    for (const auto& m : gr.standardized_moments) moments.push_back({{"k", m.k}, {"value", m.value}, {"se", m.se}});
    per.push_back({{"n", gr.n},
                   {"mean", gr.moments.mean},
                   {"var", gr.moments.variance},
                   {"var_method", to_string(gr.moments.method)},
                   {"mean_se", gr.moments.mean_se},
                   {"var_se", gr.moments.variance_se},
                   {"raw_variance", gr.raw_variance},
                   {"variance_condition_violated", gr.variance_condition_violated},
                   {"note", gr.note},
                   {"moments", moments},
                   {"ks", gr.ks},
                   {"seconds", seconds(gr)}});
  }
  j["per_n"] = per;
  if (result.scaling) {
    j["scaling"] = {{"slope", result.scaling->slope},
                    {"intercept", result.scaling->intercept},
                    {"residual", result.scaling->residual},
                    {"kappa_hat", result.scaling->kappa_hat},
                    {"flagged", result.scaling->flagged}};
  } else {
    j["scaling"] = nullptr;
  }
  Json tj = Json::array();
  for (const auto& ch : checks) tj.push_back({{"name", ch.name}, {"limit", ch.limit}, {"observed", ch.observed}, {"pass", ch.pass}});
  j["thresholds"] = tj;
  j["passed"] = passed;
  ctx.files.emplace_back("report.json", dump_json(j) + "\n");

  std::string csv = config_line(c) + "n,mean,var";
  for (std::size_t k = 1; k <= e.moment_orders; ++k) csv += fmt::format(",m{}", k);
  csv += ",ks,seconds\n";
  std::string ks_csv = config_line(c) + "n,ks\n";
  std::string m4_csv = config_line(c) + "n,m4_abs_dev\n";
  for (const auto& gr : result.per_n) {
    csv += fmt::format("{},{},{}", gr.n, g(gr.moments.mean), g(gr.moments.variance));
    double m4 = std::numeric_limits<double>::quiet_NaN();
    for (const auto& m : gr.standardized_moments) {
      csv += "," + g(m.value);
      if (m.k == 4) m4 = m.value;
    }
    csv += fmt::format(",{},{}\n", g(gr.ks), timing ? g(gr.seconds) : "");
    ks_csv += fmt::format("{},{}\n", gr.n, g(gr.ks));
    m4_csv += fmt::format("{},{}\n", gr.n, g(std::abs(m4 - 3.0)));
    ctx.log(1, fmt::format("n={} ks={} var={}", gr.n, g(gr.ks), g(gr.moments.variance)));
  }
  ctx.files.emplace_back("report.csv", std::move(csv));
  ctx.files.emplace_back("plot_ks.csv", std::move(ks_csv));
  if (e.moment_orders >= 4) ctx.files.emplace_back("plot_m4.csv", std::move(m4_csv));
  for (const auto& ch : checks) {
    if (!ch.pass) ctx.err << "verify-clt: threshold " << ch.name << " violated (observed " << ch.observed.dump() << ")\n";
  }
  return passed;
}

// ---------------------------------------------------------------- oracle

void cmd_oracle(Context& ctx) {
  auto& c = ctx.config;
  check_keys(c, {"process", "kernel", "mode", "n_grid", "budget"}, "config");
  const ProcessSpec spec = parse_process(c.at("process"));
  const Kernel kernel = parse_kernel(c.at("kernel"));
  const Mode mode = mode_of(c);
  const auto ns = get_size_array(c, "n_grid", "config");
  const std::uint64_t budget = get_size_or(c, "budget", kDefaultEnumerationBudget, "config");
  if (ns.empty()) throw ConfigError("config.n_grid must be nonempty");
  c["process"] = process_to_json(spec);
  c["mode"] = to_string(mode);
  c["budget"] = budget;
  if (!spec.is_discrete()) throw ConfigError("oracle needs a discrete process");
  for (auto n : ns) {
    const auto outcomes = path_outcome_count(spec, n);
    if (!outcomes || *outcomes > budget) {
      throw BudgetExceeded(fmt::format("oracle: n = {} needs more than the budget of {} paths", n, budget));
    }
  }
  if (ctx.opt.dry_run) return;
  std::string csv = config_line(c) + "n,mean,variance,method,paths,degenerate\n";
  for (auto n : ns) {
    const auto m = exact_moments(spec, {mode, n, kernel}, budget);
    csv += fmt::format("{},{},{},{},{},{}\n", n, g(m.mean), g(m.variance), to_string(m.method),
                       *path_outcome_count(spec, n), m.degenerate ? "true" : "false");
  }
  ctx.files.emplace_back("oracle.csv", std::move(csv));
}

void write_files(const Context& ctx) {
  const fs::path dir(ctx.opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& [name, body] : ctx.files) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    f << body;
    ctx.log(1, "wrote " + (dir / name).string());
  }
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"U- and V-statistics of mixing sequences"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  const std::vector<std::string> commands{"beta", "simulate", "stat", "graph-audit", "conditions", "verify-clt", "oracle"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", opt.config_path, "JSON config file")->required();
    sub->add_option("-o,--out", opt.out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_flag("-v,--verbose", opt.verbosity, "more progress output");
    sub->add_option("-j,--jobs", opt.jobs, "worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    sub->add_flag("--dry-run", opt.dry_run, "print the resolved plan and exit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  opt.command = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed") > 0) opt.seed = seed;

  try {
    Context ctx{opt, load_config(opt.config_path), out, err, {}};
    require_object(ctx.config, "config");
    bool passed = true;
    if (opt.command == "beta") {
      cmd_beta(ctx);
    } else if (opt.command == "simulate") {
      cmd_simulate(ctx);
    } else if (opt.command == "stat") {
      cmd_stat(ctx);
    } else if (opt.command == "graph-audit") {
      passed = cmd_graph_audit(ctx);
    } else if (opt.command == "conditions") {
      passed = cmd_conditions(ctx);
    } else if (opt.command == "verify-clt") {
      passed = cmd_verify_clt(ctx);
    } else {
      cmd_oracle(ctx);
    }
    if (opt.dry_run) {
      out << "command: " << opt.command << '\n' << "config: " << dump_json(ctx.config, -1) << '\n';
      out << "output: " << opt.out_dir << '\n';
      return kExitOk;
    }
    write_files(ctx);
    return passed ? kExitOk : kExitThresholds;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace ustat::cli
