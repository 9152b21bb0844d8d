#include "ustat/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "parallel.hpp"
#include "ustat/combinatorics.hpp"
#include "ustat/error.hpp"
#include "ustat/summation.hpp"

namespace ustat {

namespace {

// Power sums sum_i d_i^j for j = 0..K over one jackknife block.
using PowerSums = std::vector<double>;

PowerSums power_sums(std::span<const double> d, std::size_t orders) {
  std::vector<CompensatedSum> acc(orders + 1);
  for (double x : d) {
    double p = 1.0;
    for (std::size_t j = 0; j <= orders; ++j) {
      acc[j].add(p);
      p *= x;
    }
  }
  PowerSums out(orders + 1);
  for (std::size_t j = 0; j <= orders; ++j) out[j] = acc[j].value();
  return out;
}

// Standardized moments k = 1..K from power sums of d, either re-centering on
// the subsample (estimated) or treating d as already standardized.
std::vector<double> moments_from_sums(const PowerSums& p, std::size_t orders, bool recenter) {
  const double count = p[0];
  std::vector<double> out(orders);
  if (!recenter) {
    for (std::size_t k = 1; k <= orders; ++k) out[k - 1] = p[k] / count;
    return out;
  }
  const double shift = -p[1] / count;
  std::vector<double> central(orders + 1, 0.0);
  for (std::size_t k = 0; k <= orders; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) s += binomial(k, j) * p[j] * std::pow(shift, static_cast<double>(k - j));
    central[k] = s / count;
  }
  const double sd = std::sqrt(central[2]);
  for (std::size_t k = 1; k <= orders; ++k) out[k - 1] = central[k] / std::pow(sd, static_cast<double>(k));
  return out;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_moment(std::size_t k) {
  if (k % 2 == 1) return 0.0;
  double out = 1.0;
  for (std::size_t j = k; j > 1; j -= 2) out *= static_cast<double>(j - 1);
  return out;
}

double ks_distance(std::span<const double> sample) {
  if (sample.empty()) throw PreconditionViolation("ks_distance: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double phi = normal_cdf(sorted[i]);
    const double upper = static_cast<double>(i + 1) / count - phi;
    const double lower = phi - static_cast<double>(i) / count;
    d = std::max({d, upper, lower});
  }
  return d;
}

const char* to_string(Centering c) {
  switch (c) {
    case Centering::exact_oracle:
      return "exact_oracle";
    case Centering::estimated:
      return "estimated";
    default:
      return "auto";
  }
}

Centering parse_centering(const std::string& s) {
  if (s == "auto") return Centering::automatic;
  if (s == "exact_oracle") return Centering::exact_oracle;
  if (s == "estimated") return Centering::estimated;
  throw ConfigError("centering must be auto, exact_oracle or estimated");
}

void ExperimentConfig::validate() const {
  if (!spec && !spec_for_n) throw ConfigError("experiment needs a process");
  if (replicates < 100) throw ConfigError("experiment needs at least 100 replicates");
  if (n_grid.empty()) throw ConfigError("experiment needs a nonempty n grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw ConfigError("n grid entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n grid must be strictly increasing");
    if (mode == Mode::U && n_grid[i] < kernel.order()) throw ConfigError("n grid entries must be >= kernel order");
  }
  if (moment_orders == 0) throw ConfigError("moment orders must be >= 1");
  if (jackknife_blocks < 2 || jackknife_blocks > replicates) {
    throw ConfigError("jackknife blocks must lie in [2, replicates]");
  }
}

ProcessSpec ExperimentConfig::process_for(std::size_t n) const {
  return spec_for_n ? spec_for_n(n) : *spec;
}

std::vector<double> simulate_statistics(const ExperimentConfig& config, std::size_t n, std::size_t jobs) {
  const ProcessSpec spec = config.process_for(n);
  std::vector<double> values(config.replicates);
  detail::parallel_for(config.replicates, jobs, [&](std::size_t i) {
    Rng rng(config.seed, {n, i});
    std::vector<double> path(n);
    sample_path_into(spec, path, rng);
    values[i] = statistic(config.mode, path, config.kernel);
  });
  return values;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  config.validate();
  ExperimentResult result;
  const std::size_t orders = config.moment_orders;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t n : config.n_grid) {
    const auto started = std::chrono::steady_clock::now();
    const ProcessSpec spec = config.process_for(n);
    GridResult g;
    g.n = n;

    const auto outcomes = path_outcome_count(spec, n);
    const bool affordable = outcomes && *outcomes <= config.oracle_budget;
    bool use_oracle = false;
    switch (config.centering) {
      case Centering::exact_oracle:
        if (!affordable) {
          throw BudgetExceeded("exact_oracle centering is unaffordable at n = " + std::to_string(n));
        }
        use_oracle = true;
        break;
      case Centering::estimated:
        use_oracle = false;
        break;
      default:
        use_oracle = affordable;
    }

    const auto values = simulate_statistics(config, n, jobs);
    const double count = static_cast<double>(values.size());
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    const double sample_mean = sum.value() / count;
    CompensatedSum ss, ss4;
    for (double v : values) {
      const double d = (v - sample_mean) * (v - sample_mean);
      ss.add(d);
      ss4.add(d * d);
    }
    g.raw_variance = ss.value() / (count - 1.0);

    if (use_oracle) {
      g.moments = exact_moments(spec, {config.mode, n, config.kernel}, config.oracle_budget);
    } else {
      g.moments.method = MomentMethod::monte_carlo;
      g.moments.replicates = values.size();
      g.moments.mean = sample_mean;
      g.moments.variance = ss.value() / count;  // 1/N so the standardized sample has unit variance
      g.moments.mean_se = std::sqrt(g.raw_variance / count);
      const double c2 = ss.value() / count;
      g.moments.variance_se = std::sqrt(std::max(0.0, ss4.value() / count - c2 * c2) / count);
      g.moments.degenerate =
          g.moments.variance < degenerate_variance_threshold(config.mode, n, config.kernel);
    }

    if (g.moments.degenerate || !(g.moments.variance > 0.0)) {
      g.variance_condition_violated = true;
      g.note = "variance condition violated: the statistic has (numerically) zero variance";
      g.ks = nan;
      for (std::size_t k = 1; k <= orders; ++k) g.standardized_moments.push_back({k, nan, nan});
    } else {
      std::vector<double> z(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) z[i] = standardize(values[i], g.moments);

      const auto full = power_sums(z, orders);
      const bool recenter = !use_oracle;
      std::vector<double> estimate(orders);
      for (std::size_t k = 1; k <= orders; ++k) {
        CompensatedSum acc;
        for (double x : z) acc.add(std::pow(x, static_cast<double>(k)));
        estimate[k - 1] = acc.value() / count;
      }

      // Delete-block jackknife over contiguous replicate blocks.
      const std::size_t blocks = config.jackknife_blocks;
      std::vector<std::vector<double>> leave_out(blocks);
      for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * values.size() / blocks;
        const std::size_t hi = (b + 1) * values.size() / blocks;
        const auto block = power_sums(std::span<const double>(z).subspan(lo, hi - lo), orders);
        PowerSums rest(orders + 1);
        for (std::size_t j = 0; j <= orders; ++j) rest[j] = full[j] - block[j];
        leave_out[b] = moments_from_sums(rest, orders, recenter);
      }
      for (std::size_t k = 1; k <= orders; ++k) {
        double mean = 0.0;
        for (const auto& lo : leave_out) mean += lo[k - 1];
        mean /= static_cast<double>(blocks);
        double dev = 0.0;
        for (const auto& lo : leave_out) dev += (lo[k - 1] - mean) * (lo[k - 1] - mean);
        const double se = std::sqrt(dev * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
        g.standardized_moments.push_back({k, estimate[k - 1], se});
      }
      g.ks = ks_distance(z);
    }
    g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.per_n.push_back(std::move(g));
  }

  std::vector<double> ns, ds;
  for (const auto& g : result.per_n) {
    const double d = g.variance_condition_violated ? g.raw_variance : g.moments.variance;
    if (d > 0.0) {
      ns.push_back(static_cast<double>(g.n));
      ds.push_back(d);
    }
  }
  if (ns.size() >= 3) {
    result.scaling = variance_scaling_estimate(ns, ds, config.kernel.order(), config.scaling_flag_threshold);
  }
  return result;
}

}  // namespace ustat
