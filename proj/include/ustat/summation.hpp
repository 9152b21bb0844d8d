#pragma once

#include <cmath>
#include <span>

namespace ustat {

// Neumaier-compensated accumulator. Results are reproducible for a fixed
// order of additions; combining partial sums in a fixed order keeps chunked
// reductions deterministic.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

}  // namespace ustat
