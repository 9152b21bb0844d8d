#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ustat {

// Seeded 64-bit generator. Streams are derived from a master seed and a list
// of stream coordinates (e.g. grid point and replicate index) through
// std::seed_seq, so each replicate owns an independent, order-insensitive
// stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ustat
