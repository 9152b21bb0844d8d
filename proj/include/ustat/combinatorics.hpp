#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ustat {

/// Exact binomial coefficient C(n, k), or nullopt when it does not fit in
/// 64 bits.
std::optional<std::uint64_t> binomial_exact(std::uint64_t n, std::uint64_t k);

/// C(n, k) as a double; exact whenever the value fits in 64 bits and the
/// double can represent it, otherwise a log-gamma evaluation.
double binomial(std::uint64_t n, std::uint64_t k);

/// n^k as a double.
double int_power(double base, std::size_t k);

/// Lexicographic successor of a strictly increasing 1-based index tuple
/// drawn from {1..n}. Returns false (leaving the tuple untouched) when the
/// tuple is the last one, (n-r+1, ..., n).
bool next_combination(std::span<std::size_t> tuple, std::size_t n);

/// Lexicographic successor of an arbitrary 1-based tuple in {1..n}^r.
bool next_tuple(std::span<std::size_t> tuple, std::size_t n);

/// First increasing tuple (1, 2, ..., r).
std::vector<std::size_t> first_combination(std::size_t r);

/// Splits the leading index range {1..n-r+1} into contiguous chunks whose
/// tuple counts are roughly equal. Returns chunk boundaries as pairs
/// [first_j1, last_j1]. Depends only on (n, r, target_chunks).
std::vector<std::pair<std::size_t, std::size_t>> leading_index_chunks(
    std::size_t n, std::size_t r, std::size_t target_chunks);

}  // namespace ustat
