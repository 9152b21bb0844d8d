#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "ustat/kernel.hpp"
#include "ustat/process.hpp"

namespace ustat {

enum class Mode { U, V };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

struct StatisticConfig {
  Mode mode = Mode::U;
  std::size_t n = 0;
  Kernel kernel;
};

enum class MomentMethod { exact_enumeration, monte_carlo };

const char* to_string(MomentMethod m);

struct MomentPair {
  double mean = 0.0;
  double variance = 0.0;
  MomentMethod method = MomentMethod::exact_enumeration;
  std::size_t replicates = 0;  // Monte Carlo only
  double mean_se = 0.0;
  double variance_se = 0.0;
  bool degenerate = false;  // variance below the degeneracy threshold
};

/// Number of summands: C(n, r) for U-mode, n^r for V-mode.
double term_count(Mode mode, std::size_t n, std::size_t r);

/// Sum of the kernel over all 1 <= j1 < ... < jr <= n, enumerated in
/// lexicographic order with compensated summation. The work is split into
/// fixed chunks on the leading index, so the result is bitwise identical for
/// any `jobs`.
double u_statistic(std::span<const double> path, const Kernel& kernel, std::size_t jobs = 1);

/// Sum over all ordered r-tuples in {1..n}^r, diagonals included.
double v_statistic(std::span<const double> path, const Kernel& kernel, std::size_t jobs = 1);

double statistic(Mode mode, std::span<const double> path, const Kernel& kernel, std::size_t jobs = 1);

struct ClassicalU {
  double value = 0.0;
  double divisor = 0.0;
  bool divisor_exact = true;  // false: C(n, r) overflowed 64 bits
};

/// U_n / C(n, r) with the binomial coefficient computed in integer arithmetic
/// when it fits.
ClassicalU classical_u(std::span<const double> path, const Kernel& kernel, std::size_t jobs = 1);

/// (value - mean) / sqrt(variance). Throws DegenerateVariance when the
/// variance is not positive or the pair is flagged degenerate.
double standardize(double value, const MomentPair& moments);

/// Variance threshold below which the statistic is treated as degenerate:
/// 1e-12 * (F * T)^2 with T the term count.
double degenerate_variance_threshold(Mode mode, std::size_t n, const Kernel& kernel);

/// Exact E and D of U_n or V_n by summing over every path of length n with
/// its exact probability. Throws BudgetExceeded when the outcome count
/// exceeds `budget`.
MomentPair exact_moments(const ProcessSpec& spec, const StatisticConfig& config,
                         std::uint64_t budget = kDefaultEnumerationBudget);

/// Sample mean and variance of the statistic over N independent replicates;
/// replicate i uses the stream (seed, n, i).
MomentPair monte_carlo_moments(const ProcessSpec& spec, const StatisticConfig& config,
                               std::size_t replicates, std::uint64_t seed, std::size_t jobs = 1);

}  // namespace ustat
