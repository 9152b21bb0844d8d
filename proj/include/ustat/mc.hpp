#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustat/conditions.hpp"
#include "ustat/kernel.hpp"
#include "ustat/process.hpp"
#include "ustat/statistic.hpp"

namespace ustat {

/// Standard normal distribution function, Phi(x) = erfc(-x / sqrt 2) / 2.
double normal_cdf(double x);

/// E Z^k for Z ~ N(0, 1): 0 for odd k, (k-1)!! for even k.
double normal_moment(std::size_t k);

/// sup_x |F_hat(x) - Phi(x)| evaluated on both sides of every sorted sample
/// point. Throws PreconditionViolation for an empty sample.
double ks_distance(std::span<const double> sample);

enum class Centering { automatic, exact_oracle, estimated };

const char* to_string(Centering c);
Centering parse_centering(const std::string& s);

struct ExperimentConfig {
  // Either one process for every n, or a triangular array spec_for_n(n).
  std::optional<ProcessSpec> spec;
  std::function<ProcessSpec(std::size_t)> spec_for_n;
  Kernel kernel = Kernel::constant(2, 0.0);
  Mode mode = Mode::U;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  Centering centering = Centering::automatic;
  std::size_t moment_orders = 6;
  std::size_t jackknife_blocks = 100;
  std::uint64_t oracle_budget = kDefaultEnumerationBudget;
  double scaling_flag_threshold = 0.2;

  /// Throws ConfigError: N >= 100, strictly increasing nonempty grid, a spec.
  void validate() const;
  ProcessSpec process_for(std::size_t n) const;
};

struct MomentEstimate {
  std::size_t k = 0;
  double value = 0.0;
  double se = 0.0;
};

struct GridResult {
  std::size_t n = 0;
  MomentPair moments;       // centering used for standardization
  bool variance_condition_violated = false;
  std::string note;
  std::vector<MomentEstimate> standardized_moments;  // k = 1..K
  double ks = 0.0;
  double seconds = 0.0;     // wall clock; not part of the deterministic output
  double raw_variance = 0.0;  // sample variance of the statistic (1/(N-1))
};

struct ExperimentResult {
  std::vector<GridResult> per_n;
  std::optional<VarianceScaling> scaling;
};

/// Simulates N replicate paths per grid point (replicate i of grid point n
/// uses the stream (seed, n, i)), evaluates U_n or V_n, standardizes by the
/// exact oracle moments or by the replicate pool's own mean and variance,
/// and summarizes moments (delete-block jackknife standard errors) and the
/// Kolmogorov distance to the standard normal law. Degenerate variance at a
/// grid point is recorded instead of aborting. The result is identical for
/// any `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

/// Raw statistic values for one grid point in replicate order.
std::vector<double> simulate_statistics(const ExperimentConfig& config, std::size_t n, std::size_t jobs = 1);

}  // namespace ustat
