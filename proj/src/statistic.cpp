#include "ustat/statistic.hpp"

#include <cmath>
#include <vector>

#include "parallel.hpp"
#include "ustat/combinatorics.hpp"
#include "ustat/error.hpp"
#include "ustat/summation.hpp"

namespace ustat {

namespace {

constexpr std::size_t kTargetChunks = 64;

void require_length(std::size_t n, std::size_t r, const char* what) {
  if (n < r || n == 0) {
    throw PreconditionViolation(std::string(what) + ": path length " + std::to_string(n) +
                                " is shorter than the kernel order " + std::to_string(r));
  }
}

CompensatedSum u_chunk(std::span<const double> x, const Kernel& kernel, std::size_t first,
                       std::size_t last) {
  const std::size_t n = x.size();
  const std::size_t r = kernel.order();
  CompensatedSum acc;
  if (r == 2) {
    for (std::size_t i = first; i <= last; ++i) {
      const double xi = x[i - 1];
      for (std::size_t j = i + 1; j <= n; ++j) acc.add(kernel.pair(i, j, xi, x[j - 1]));
    }
    return acc;
  }
  std::vector<std::size_t> tuple(r);
  std::vector<double> vals(r);
  for (std::size_t k = 0; k < r; ++k) tuple[k] = first + k;
  do {
    if (tuple[0] > last) break;
    for (std::size_t k = 0; k < r; ++k) vals[k] = x[tuple[k] - 1];
    acc.add(kernel(tuple, vals));
  } while (next_combination(tuple, n));
  return acc;
}

CompensatedSum v_chunk(std::span<const double> x, const Kernel& kernel, std::size_t first,
                       std::size_t last) {
  const std::size_t n = x.size();
  const std::size_t r = kernel.order();
  CompensatedSum acc;
  if (r == 2) {
    for (std::size_t i = first; i <= last; ++i) {
      const double xi = x[i - 1];
      for (std::size_t j = 1; j <= n; ++j) acc.add(kernel.pair(i, j, xi, x[j - 1]));
    }
    return acc;
  }
  std::vector<std::size_t> tuple(r, 1);
  std::vector<double> vals(r);
  tuple[0] = first;
  do {
    if (tuple[0] > last) break;
    for (std::size_t k = 0; k < r; ++k) vals[k] = x[tuple[k] - 1];
    acc.add(kernel(tuple, vals));
  } while (next_tuple(tuple, n));
  return acc;
}

double single_index_sum(std::span<const double> x, const Kernel& kernel) {
  CompensatedSum acc;
  std::size_t idx[1];
  for (std::size_t i = 0; i < x.size(); ++i) {
    idx[0] = i + 1;
    acc.add(kernel(idx, x.subspan(i, 1)));
  }
  return acc.value();
}

template <typename ChunkFn>
double chunked_sum(const std::vector<std::pair<std::size_t, std::size_t>>& chunks, std::size_t jobs,
                   ChunkFn&& fn) {
  std::vector<CompensatedSum> partial(chunks.size());
  detail::parallel_for(chunks.size(), jobs,
                       [&](std::size_t c) { partial[c] = fn(chunks[c].first, chunks[c].second); });
  CompensatedSum total;
  for (const auto& p : partial) total.add(p);
  return total.value();
}

std::vector<std::pair<std::size_t, std::size_t>> even_chunks(std::size_t n, std::size_t target) {
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  const std::size_t count = std::min(n, target);
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t first = c * n / count + 1;
    const std::size_t last = (c + 1) * n / count;
    chunks.emplace_back(first, last);
  }
  return chunks;
}

}  // namespace

const char* to_string(Mode m) { return m == Mode::U ? "U" : "V"; }

Mode parse_mode(const std::string& s) {
  if (s == "U" || s == "u") return Mode::U;
  if (s == "V" || s == "v") return Mode::V;
  throw ConfigError("mode must be \"U\" or \"V\", got \"" + s + "\"");
}

const char* to_string(MomentMethod m) {
  return m == MomentMethod::exact_enumeration ? "exact_enumeration" : "monte_carlo";
}

double term_count(Mode mode, std::size_t n, std::size_t r) {
  return mode == Mode::U ? binomial(n, r) : int_power(static_cast<double>(n), r);
}

double u_statistic(std::span<const double> path, const Kernel& kernel, std::size_t jobs) {
  const std::size_t n = path.size();
  const std::size_t r = kernel.order();
  require_length(n, r, "u_statistic");
  if (kernel.constant_value()) return *kernel.constant_value() * binomial(n, r);
  if (r == 1) return single_index_sum(path, kernel);
  return chunked_sum(leading_index_chunks(n, r, kTargetChunks), jobs,
                     [&](std::size_t a, std::size_t b) { return u_chunk(path, kernel, a, b); });
}

double v_statistic(std::span<const double> path, const Kernel& kernel, std::size_t jobs) {
  const std::size_t n = path.size();
  const std::size_t r = kernel.order();
  require_length(n, 1, "v_statistic");
  if (kernel.constant_value()) return *kernel.constant_value() * int_power(static_cast<double>(n), r);
  if (r == 1) return single_index_sum(path, kernel);
  return chunked_sum(even_chunks(n, kTargetChunks), jobs,
                     [&](std::size_t a, std::size_t b) { return v_chunk(path, kernel, a, b); });
}

double statistic(Mode mode, std::span<const double> path, const Kernel& kernel, std::size_t jobs) {
  return mode == Mode::U ? u_statistic(path, kernel, jobs) : v_statistic(path, kernel, jobs);
}

ClassicalU classical_u(std::span<const double> path, const Kernel& kernel, std::size_t jobs) {
  ClassicalU out;
  const double u = u_statistic(path, kernel, jobs);
  if (auto exact = binomial_exact(path.size(), kernel.order())) {
    out.divisor = static_cast<double>(*exact);
    out.divisor_exact = true;
  } else {
    out.divisor = binomial(path.size(), kernel.order());
    out.divisor_exact = false;
  }
  out.value = u / out.divisor;
  return out;
}

double degenerate_variance_threshold(Mode mode, std::size_t n, const Kernel& kernel) {
  const double scale = kernel.bound() * term_count(mode, n, kernel.order());
  return 1e-12 * scale * scale;
}

double standardize(double value, const MomentPair& moments) {
  if (moments.degenerate || !(moments.variance > 0.0)) {
    throw DegenerateVariance("cannot standardize: the statistic has zero variance "
                             "(the variance growth condition fails)");
  }
  return (value - moments.mean) / std::sqrt(moments.variance);
}

MomentPair exact_moments(const ProcessSpec& spec, const StatisticConfig& config, std::uint64_t budget) {
  const auto& kernel = config.kernel;
  if (config.mode == Mode::U) require_length(config.n, kernel.order(), "exact_moments");
  if (config.n == 0) throw PreconditionViolation("exact_moments: n must be >= 1");

  std::vector<std::pair<double, double>> weighted;  // (probability, statistic)
  CompensatedSum mean_acc;
  for_each_path(spec, config.n, budget, [&](std::span<const double> path, double p) {
    const double s = statistic(config.mode, path, kernel);
    weighted.emplace_back(p, s);
    mean_acc.add(p * s);
  });
  MomentPair out;
  out.method = MomentMethod::exact_enumeration;
  out.mean = mean_acc.value();
  CompensatedSum var_acc;
  for (const auto& [p, s] : weighted) var_acc.add(p * (s - out.mean) * (s - out.mean));
  out.variance = std::max(0.0, var_acc.value());
  if (out.variance < degenerate_variance_threshold(config.mode, config.n, kernel)) {
    out.variance = 0.0;
    out.degenerate = true;
  }
  return out;
}

MomentPair monte_carlo_moments(const ProcessSpec& spec, const StatisticConfig& config,
                               std::size_t replicates, std::uint64_t seed, std::size_t jobs) {
  if (replicates < 2) throw PreconditionViolation("monte_carlo_moments: need at least 2 replicates");
  if (config.mode == Mode::U) require_length(config.n, config.kernel.order(), "monte_carlo_moments");
  std::vector<double> values(replicates);
  detail::parallel_for(replicates, jobs, [&](std::size_t i) {
    Rng rng(seed, {config.n, i});
    const auto path = sample_path(spec, config.n, rng);
    values[i] = statistic(config.mode, path, config.kernel);
  });
  const double count = static_cast<double>(replicates);
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  MomentPair out;
  out.method = MomentMethod::monte_carlo;
  out.replicates = replicates;
  out.mean = sum.value() / count;
  CompensatedSum m2, m4;
  for (double v : values) {
    const double d = (v - out.mean) * (v - out.mean);
    m2.add(d);
    m4.add(d * d);
  }
  const double central2 = m2.value() / count;
  const double central4 = m4.value() / count;
  out.variance = m2.value() / (count - 1.0);
  out.mean_se = std::sqrt(out.variance / count);
  out.variance_se = std::sqrt(std::max(0.0, central4 - central2 * central2) / count);
  if (out.variance < degenerate_variance_threshold(config.mode, config.n, config.kernel)) {
    out.degenerate = true;
  }
  return out;
}

}  // namespace ustat
