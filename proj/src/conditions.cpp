#include "ustat/conditions.hpp"

#include <algorithm>
#include <cmath>

#include "ustat/combinatorics.hpp"
#include "ustat/depgraph.hpp"
#include "ustat/error.hpp"

namespace ustat {

namespace {

void check_b(double b) {
  if (!(b > 0.0 && b <= 2.0 / 3.0 + 1e-15)) {
    throw PreconditionViolation("b must lie in (0, 2/3]");
  }
}

void check_variance(double d) {
  if (!(d > 0.0)) throw DegenerateVariance("condition terms need a positive variance D");
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += e * e;
  }
  fit.rms = std::sqrt(ss / k);
  return fit;
}

Verdict sequence_verdict(const std::vector<double>& values, double threshold) {
  if (values.size() < 2) return Verdict::inconclusive;
  const bool all_zero = std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  if (all_zero) return Verdict::decreasing;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) return Verdict::non_decreasing;
  }
  return values.back() <= threshold ? Verdict::decreasing : Verdict::inconclusive;
}

}  // namespace

ConditionTerms theorem1_terms(const Theorem1Inputs& in) {
  check_b(in.b);
  check_variance(in.variance);
  if (!(in.m_n >= 1.0)) throw PreconditionViolation("m_n must be >= 1");
  if (in.r == 0 || !(in.n >= 1.0)) throw PreconditionViolation("theorem1_terms needs n >= 1 and r >= 1");
  if (in.beta_m < 0.0) throw PreconditionViolation("beta(m) must be nonnegative");
  const double r = static_cast<double>(in.r);
  const double f2 = in.bound * in.bound;
  ConditionTerms t;
  t.first = f2 * std::pow(in.m_n, 2.0 - in.b) * std::pow(in.n, 2.0 * (r - 1.0) + in.b) *
            std::pow(r, 4.0 - 2.0 * in.b) / in.variance;
  t.second = std::pow(in.beta_m, in.b) * f2 * std::pow(in.n, 2.0 * r) / in.variance;
  return t;
}

ConditionTerms tc_terms(double M, double Q, double gamma_r, double bound, double T, double variance, double b) {
  check_b(b);
  check_variance(variance);
  if (M < 0.0 || Q < 0.0 || gamma_r < 0.0) throw PreconditionViolation("tc_terms inputs must be nonnegative");
  ConditionTerms t;
  t.first = std::pow(M, b) * std::pow(Q, 2.0 - b) / variance;
  t.second = std::pow(gamma_r, b) * (bound * T) * (bound * T) / variance;
  return t;
}

std::size_t block_schedule(double n, double kappa, double b0) {
  if (!(b0 > 0.0) || b0 > 2.0 / 3.0 + 1e-15) throw ConfigError("block schedule needs b0 in (0, 2/3]");
  if (!(b0 < kappa)) throw ConfigError("block schedule needs b0 < kappa");
  if (!(n >= 1.0)) throw ConfigError("block schedule needs n >= 1");
  const double raw = std::pow(n, (kappa - b0) / 4.0);
  // Absorb rounding just below an integer, e.g. 4096^(1/12) = 2 - 1e-16.
  const double m = std::floor(raw * (1.0 + 1e-12));
  return static_cast<std::size_t>(std::max(1.0, m));
}

RateFunction rate_function(const std::string& name, double scale) {
  if (!(scale > 0.0)) throw ConfigError("rate function scale must be positive");
  RateFunction f{name, scale, {}};
  if (name == "log") {
    f.h = [scale](double t) { return scale * std::log(t); };
  } else if (name == "sqrt") {
    f.h = [scale](double t) { return scale * std::sqrt(t); };
  } else if (name == "linear") {
    f.h = [scale](double t) { return scale * t; };
  } else {
    throw ConfigError("unknown rate function '" + name + "' (expected log, sqrt, linear)");
  }
  return f;
}

void RateModel::validate() const {
  if (r == 0) throw ConfigError("rate model needs r >= 1");
  if (!(kappa > 0.0)) throw ConfigError("rate model needs kappa > 0");
  if (variance_constant) {
    if (!(*variance_constant > 0.0)) throw ConfigError("rate model needs C > 0");
  } else if (measured_variance.empty()) {
    throw ConfigError("rate model needs a variance constant C or measured variances");
  }
  if (!rate && !beta) throw ConfigError("rate model needs a rate function h or a beta profile");
  if (!bound) throw ConfigError("rate model needs a bound function F(n)");
}

double RateModel::variance(double n) const {
  if (variance_constant) {
    return *variance_constant * std::pow(n, 2.0 * (static_cast<double>(r) - 1.0) + kappa);
  }
  auto it = measured_variance.find(static_cast<std::size_t>(n));
  if (it == measured_variance.end()) {
    throw ConfigError("no measured variance for n = " + std::to_string(static_cast<std::size_t>(n)));
  }
  return it->second;
}

double RateModel::beta_bound(std::size_t m) const {
  if (rate) {
    const double t = static_cast<double>(m);
    return std::min(1.0, std::pow(t, -rate->h(t)));
  }
  return (*beta)(m);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::decreasing:
      return "decreasing";
    case Verdict::non_decreasing:
      return "non-decreasing";
    default:
      return "inconclusive";
  }
}

ConditionReport theorem2_check(const RateModel& model, std::span<const double> n_grid,
                               std::span<const double> b_grid, const Theorem2Options& options) {
  model.validate();
  if (n_grid.empty() || b_grid.empty()) throw ConfigError("theorem2_check needs nonempty n and b grids");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (!(n_grid[i] > n_grid[i - 1])) throw ConfigError("n grid must be strictly increasing");
  }
  for (double b : b_grid) {
    if (!(b > 0.0 && b <= options.b0 + 1e-15)) throw ConfigError("every b must lie in (0, b0]");
  }
  // Validates b0 against kappa before any evaluation.
  block_schedule(n_grid.front(), model.kappa, options.b0);

  ConditionReport report;
  report.r = model.r;
  report.kappa = model.kappa;
  report.b0 = options.b0;
  report.R = options.R;
  report.threshold = options.threshold;
  report.n_grid.assign(n_grid.begin(), n_grid.end());
  report.b_grid.assign(b_grid.begin(), b_grid.end());
  report.variance_provenance = model.variance_provenance;

  const double r = static_cast<double>(model.r);
  const double lo_exp = 2.0 * (r - 1.0) - model.kappa;
  for (double n : n_grid) {
    const std::size_t m = block_schedule(n, model.kappa, options.b0);
    const double variance = model.variance(n);
    const double beta_m = model.beta_bound(m);
    const double bound = model.bound(n);
    const GraphSpec graph{static_cast<std::size_t>(n), model.r, m, options.mode};
    const GammaValue g = gamma(options.R, std::clamp(beta_m, 0.0, 1.0));
    for (double b : b_grid) {
      ConditionPoint pt;
      pt.n = n;
      pt.b = b;
      pt.m_n = m;
      pt.variance = variance;
      pt.beta_m = beta_m;
      pt.theorem1 = theorem1_terms({n, static_cast<double>(m), b, bound, model.r, variance, beta_m, options.mode});
      const double md = static_cast<double>(m);
      pt.reduced.first = std::pow(md, 2.0 - b) * std::pow(n, b - model.kappa);
      pt.reduced.second = std::pow(beta_m, b) * std::pow(n, lo_exp);
      pt.tc = tc_terms(m_bound(bound, graph), q_bound(options.R, bound, graph), g.value, bound,
                       term_count(options.mode, graph.n, model.r), variance, b);
      pt.gamma = g.value;
      pt.gamma_out_of_range = g.out_of_range;
      report.points.push_back(pt);
    }
  }

  // Verdicts over the top half of the n grid, per term and per b.
  const std::size_t nb = b_grid.size();
  const std::size_t start = n_grid.size() / 2;
  bool all_decreasing = true;
  bool any_increase = false;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const double b = b_grid[bi];
    std::vector<double> t1, t2, red1, red2;
    for (std::size_t ni = start; ni < n_grid.size(); ++ni) {
      const auto& pt = report.points[ni * nb + bi];
      t1.push_back(pt.theorem1.first);
      t2.push_back(pt.theorem1.second);
      red1.push_back(pt.reduced.first);
      red2.push_back(pt.reduced.second);
    }
    const std::pair<const char*, const std::vector<double>*> seqs[] = {
        {"T1", &t1}, {"T2", &t2}, {"reduced_first", &red1}, {"reduced_second", &red2}};
    for (const auto& [name, values] : seqs) {
      const Verdict v = sequence_verdict(*values, options.threshold);
      report.sequences.push_back({name, b, v});
      all_decreasing = all_decreasing && v == Verdict::decreasing;
      any_increase = any_increase || v == Verdict::non_decreasing;
    }

    ExponentCheck check;
    check.b = b;
    check.analytic = (model.kappa - options.b0) / 4.0 * (2.0 - b) + b - model.kappa;
    if (n_grid.size() >= 2) {
      std::vector<double> lx, ly;
      for (double n : n_grid) {
        const double m = std::pow(n, (model.kappa - options.b0) / 4.0);
        lx.push_back(std::log(n));
        ly.push_back(std::log(std::pow(m, 2.0 - b) * std::pow(n, b - model.kappa)));
      }
      check.fitted = least_squares(lx, ly).slope;
    }
    report.exponents.push_back(check);
  }
  report.verdict = all_decreasing ? Verdict::decreasing
                                  : (any_increase ? Verdict::non_decreasing : Verdict::inconclusive);

  if (model.rate) {
    const auto& h = model.rate->h;
    const double t_min = static_cast<double>(report.points.front().m_n);
    const double t_max = static_cast<double>(report.points.back().m_n);
    bool nondecreasing = true;
    double prev = h(t_min);
    for (const auto& pt : report.points) {
      const double cur = h(static_cast<double>(pt.m_n));
      nondecreasing = nondecreasing && cur >= prev;
      prev = cur;
    }
    if (!nondecreasing || !(h(t_max) > h(t_min))) {
      report.warnings.push_back("h(t) does not increase over the block lengths of the grid; "
                                "divergence of h cannot be confirmed");
    }
  }
  for (const auto& pt : report.points) {
    if (pt.gamma_out_of_range) {
      report.warnings.push_back("gamma_R >= 1 at some grid points (reported, outside (0,1))");
      break;
    }
  }
  return report;
}

VarianceScaling variance_scaling_estimate(std::span<const double> n_values, std::span<const double> variances,
                                          std::size_t r, double flag_threshold) {
  if (n_values.size() != variances.size()) {
    throw PreconditionViolation("variance_scaling_estimate: n and D differ in length");
  }
  if (n_values.size() < 3) throw PreconditionViolation("variance_scaling_estimate: need at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (!(variances[i] > 0.0) || !(n_values[i] > 0.0)) {
      throw PreconditionViolation("variance_scaling_estimate: n and D must be positive");
    }
    lx.push_back(std::log(n_values[i]));
    ly.push_back(std::log(variances[i]));
  }
  const auto fit = least_squares(lx, ly);
  VarianceScaling out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.residual = fit.rms;
  out.kappa_hat = fit.slope - 2.0 * (static_cast<double>(r) - 1.0);
  out.flagged = out.kappa_hat <= flag_threshold;
  return out;
}

}  // namespace ustat
