#include "ustat/combinatorics.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

namespace ustat {

std::optional<std::uint64_t> binomial_exact(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i stays integral at every step.
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

double binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  if (auto exact = binomial_exact(n, k)) return static_cast<double>(*exact);
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return std::exp(std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1));
}

double int_power(double base, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 0; i < k; ++i) out *= base;
  return out;
}

bool next_combination(std::span<std::size_t> tuple, std::size_t n) {
  const std::size_t r = tuple.size();
  for (std::size_t pos = r; pos-- > 0;) {
    // Largest admissible value at position pos is n - (r - 1 - pos).
    if (tuple[pos] < n - (r - 1 - pos)) {
      ++tuple[pos];
      for (std::size_t q = pos + 1; q < r; ++q) tuple[q] = tuple[q - 1] + 1;
      return true;
    }
  }
  return false;
}

bool next_tuple(std::span<std::size_t> tuple, std::size_t n) {
  for (std::size_t pos = tuple.size(); pos-- > 0;) {
    if (tuple[pos] < n) {
      ++tuple[pos];
      for (std::size_t q = pos + 1; q < tuple.size(); ++q) tuple[q] = 1;
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> first_combination(std::size_t r) {
  std::vector<std::size_t> t(r);
  for (std::size_t i = 0; i < r; ++i) t[i] = i + 1;
  return t;
}

std::vector<std::pair<std::size_t, std::size_t>> leading_index_chunks(
    std::size_t n, std::size_t r, std::size_t target_chunks) {
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  if (r == 0 || n < r) return chunks;
  const std::size_t last_lead = n - r + 1;
  const double total = binomial(n, r);
  const double per_chunk = total / static_cast<double>(std::max<std::size_t>(1, target_chunks));
  std::size_t start = 1;
  double acc = 0.0;
  for (std::size_t j1 = 1; j1 <= last_lead; ++j1) {
    // Tuples with leading index j1: C(n - j1, r - 1).
    acc += binomial(n - j1, r - 1);
    if (acc >= per_chunk || j1 == last_lead) {
      chunks.emplace_back(start, j1);
      start = j1 + 1;
      acc = 0.0;
    }
  }
  return chunks;
}

}  // namespace ustat
