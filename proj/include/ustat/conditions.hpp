#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustat/process.hpp"
#include "ustat/statistic.hpp"

namespace ustat {

struct ConditionTerms {
  double first = 0.0;
  double second = 0.0;
  double sum() const { return first + second; }
};

struct Theorem1Inputs {
  double n = 0.0;
  double m_n = 1.0;
  double b = 2.0 / 3.0;
  double bound = 1.0;  // F_n
  std::size_t r = 2;
  double variance = 1.0;  // D U_n or D V_n
  double beta_m = 0.0;    // beta_n(m_n)
  Mode mode = Mode::U;
};

/// T1 = F^2 m^(2-b) n^(2(r-1)+b) r^(4-2b) / D and T2 = beta(m)^b F^2 n^(2r) / D.
/// The formula is the same for U- and V-statistics. Throws
/// PreconditionViolation for b outside (0, 2/3] or m_n < 1 and
/// DegenerateVariance for D <= 0.
ConditionTerms theorem1_terms(const Theorem1Inputs& in);

/// Generic characterizing-graph condition: M^b Q^(2-b) / D and
/// gamma^b (F T)^2 / D.
ConditionTerms tc_terms(double M, double Q, double gamma_r, double bound, double T, double variance,
                        double b);

/// m_n = floor(n^((kappa - b0)/4)), at least 1. Requires 0 < b0 <= 2/3 and
/// b0 < kappa; throws ConfigError otherwise.
std::size_t block_schedule(double n, double kappa, double b0);

// Rate function h(t) of the mixing bound beta(t) <= t^(-h(t)).
struct RateFunction {
  std::string name;
  double scale = 1.0;
  std::function<double(double)> h;
};

/// "log": scale*ln t, "sqrt": scale*sqrt t, "linear": scale*t.
RateFunction rate_function(const std::string& name, double scale = 1.0);

// Inputs of the Theorem-2 style rate check.
struct RateModel {
  std::size_t r = 2;
  std::function<double(double)> bound = [](double) { return 1.0; };  // F(n)
  double kappa = 1.0;
  // Variance model: parametric C n^(2(r-1)+kappa) or measured values per n.
  std::optional<double> variance_constant;
  std::map<std::size_t, double> measured_variance;
  std::string variance_provenance = "parametric";  // parametric, exact, monte_carlo, measured
  // Mixing model: either a rate function h or a process beta profile.
  std::optional<RateFunction> rate;
  std::optional<BetaProfile> beta;

  /// Throws ConfigError when C <= 0, kappa <= 0, r == 0 or no variance/mixing
  /// model is present.
  void validate() const;
  double variance(double n) const;
  // beta(m) bound: m^(-h(m)) for a rate function, the profile otherwise.
  double beta_bound(std::size_t m) const;
};

enum class Verdict { decreasing, non_decreasing, inconclusive };

const char* to_string(Verdict v);

struct ConditionPoint {
  double n = 0.0;
  double b = 0.0;
  std::size_t m_n = 1;
  double variance = 0.0;
  double beta_m = 0.0;
  ConditionTerms theorem1;  // T1, T2
  ConditionTerms reduced;   // m^(2-b) n^(b-kappa), beta(m)^b n^(2(r-1)-kappa)
  ConditionTerms tc;        // graph-bound terms with M, Q_R, gamma_R substituted
  double gamma = 0.0;
  bool gamma_out_of_range = false;
};

struct SequenceVerdict {
  std::string term;
  double b = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

struct ExponentCheck {
  double b = 0.0;
  double analytic = 0.0;  // (kappa-b0)/4 (2-b) + b - kappa
  double fitted = 0.0;    // log-log slope of the first reduced summand, unfloored schedule
};

struct ConditionReport {
  std::size_t r = 2;
  double kappa = 0.0;
  double b0 = 0.0;
  std::size_t R = 1;
  double threshold = 0.1;
  std::vector<double> n_grid;
  std::vector<double> b_grid;
  std::vector<ConditionPoint> points;  // n-major, then b
  std::vector<SequenceVerdict> sequences;
  std::vector<ExponentCheck> exponents;
  Verdict verdict = Verdict::inconclusive;
  std::string variance_provenance;
  std::vector<std::string> warnings;
};

struct Theorem2Options {
  double b0 = 2.0 / 3.0;
  std::size_t R = 1;
  double threshold = 0.1;
  Mode mode = Mode::U;
};

/// Evaluates the reduced condition and the full Theorem-1 terms along the
/// block schedule on an n x b grid. A term sequence is "decreasing" when it
/// is strictly decreasing (or identically zero) over the top half of the n
/// grid and its final value is at most `threshold`; the overall verdict
/// requires this of the T1, T2 and both reduced sequences at every b. The
/// graph-bound (TC) terms are reported but do not enter the verdict.
ConditionReport theorem2_check(const RateModel& model, std::span<const double> n_grid,
                               std::span<const double> b_grid, const Theorem2Options& options = {});

struct VarianceScaling {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log-log fit residuals
  double kappa_hat = 0.0;  // slope - 2(r-1)
  bool flagged = false;    // kappa_hat <= flag_threshold
};

/// Least-squares fit of log D against log n. Requires at least 3 points and
/// positive D; throws PreconditionViolation otherwise.
VarianceScaling variance_scaling_estimate(std::span<const double> n_values, std::span<const double> variances,
                                          std::size_t r, double flag_threshold = 0.2);

}  // namespace ustat
