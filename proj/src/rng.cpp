#include "ustat/rng.hpp"

#include <vector>

namespace ustat {

Rng::Rng(std::uint64_t seed) : Rng(seed, {}) {}

Rng::Rng(std::uint64_t master_seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

}  // namespace ustat
