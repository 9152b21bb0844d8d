#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustat/process.hpp"

namespace ustat {

// Bounded kernel f_{j1..jr}(x_1..x_r) of order r. Indices are 1-based
// sample positions. Kernels carry no 1/C(n,r) normalization.
class Kernel {
 public:
  using EvalFn = std::function<double(std::span<const std::size_t>, std::span<const double>)>;
  // Order-2 shortcut used by the pair loops; must agree with EvalFn.
  using PairFn = std::function<double(std::size_t, std::size_t, double, double)>;

  struct Traits {
    std::string name;
    std::size_t order = 2;
    double bound = 1.0;
    bool symmetric = true;
    bool index_dependent = false;
  };

  Kernel(Traits traits, EvalFn eval, PairFn pair = {});

  // Kernel identically equal to `value`, used by the constant fast paths.
  static Kernel constant(std::size_t order, double value);

  double operator()(std::span<const std::size_t> indices, std::span<const double> values) const {
    return eval_(indices, values);
  }

  double pair(std::size_t i, std::size_t j, double x, double y) const {
    if (pair_) return pair_(i, j, x, y);
    const std::size_t idx[2] = {i, j};
    const double vals[2] = {x, y};
    return eval_(idx, vals);
  }

  const std::string& name() const { return traits_.name; }
  std::size_t order() const { return traits_.order; }
  double bound() const { return traits_.bound; }
  bool symmetric() const { return traits_.symmetric; }
  bool index_dependent() const { return traits_.index_dependent; }
  const std::optional<double>& constant_value() const { return constant_; }

 private:
  Traits traits_;
  EvalFn eval_;
  PairFn pair_;
  std::optional<double> constant_;
};

using KernelParams = std::map<std::string, double>;

/// Built-in kernels:
///   product            x*y                      params: value_bound (|x| <= B, F = B^2)
///   match_indicator    1{x = y}                 F = 1
///   kendall_sign       sign(x - y)              F = 1, antisymmetric
///   clipped_gini       min(|x - y|, clip)       params: clip (F = clip)
///   weighted_product   cos(omega*(i+j)) x*y     params: value_bound, omega (default pi)
///   degenerate_product (x - mu)(y - mu)         params: mu, value_bound (F = (B + |mu|)^2)
///   identity           x (order 1)              params: value_bound
///   constant           c (any order)            params: value, order
/// Throws ConfigError for unknown names, unknown params or out-of-range values.
Kernel builtin_kernel(const std::string& name, const KernelParams& params = {});

std::vector<std::string> builtin_kernel_names();

// Hoeffding projection of a symmetric, index-independent kernel under
// independent copies of X_1.
struct ProjectionResult {
  double theta = 0.0;
  double theta_se = 0.0;  // 0 when exact
  bool exact = false;
  std::function<double(double)> f1;
  // Tabulated f_1 on the marginal support (discrete marginals only).
  std::optional<DiscreteLaw> marginal;
  std::vector<double> f1_table;
  // Inputs kept for the variance computation.
  std::shared_ptr<const Kernel> kernel;
  std::shared_ptr<const ProcessSpec> spec;
};

struct ProjectionOptions {
  std::size_t samples = 200000;    // Monte Carlo draws for theta (continuous marginals)
  std::size_t inner_samples = 4096;  // bank of independent copies behind f_1(x)
  std::uint64_t seed = 0x5eed;
};

/// theta = E f(X~_1..X~_r), f_1(x) = E f(x, X~_2..X~_r). Exact weighted sums
/// for discrete marginals; Monte Carlo with a reported standard error
/// otherwise. Throws PreconditionViolation for index-dependent or asymmetric
/// kernels.
ProjectionResult hoeffding_projection(const ProcessSpec& spec, const Kernel& kernel,
                                      const ProjectionOptions& options = {});

struct Sigma2Result {
  double value = 0.0;
  double standard_error = 0.0;  // 0 when every term is exact
  double variance_term = 0.0;   // E f_1^2(X_1) - theta^2
  std::vector<double> lag_terms;  // E f_1(X_1) f_1(X_{t+1}) - theta^2, t = 1..T0
  std::size_t lag_cutoff = 0;
  double tail_bound = 0.0;      // bound on |sigma^2 - truncated sum|
  double tolerance = 0.0;
  bool tail_warning = false;
};

struct Sigma2Options {
  std::optional<double> tolerance;  // defaults to 1e-6 * F^2
  std::size_t samples = 200000;     // Monte Carlo replicates (continuous marginals)
  std::uint64_t seed = 0x51a2;
  std::uint64_t budget = kDefaultEnumerationBudget;
};

/// Truncated long-run variance of f_1 along the sequence:
///   (E f_1^2 - theta^2) + 2 sum_{t=1}^{T0} (E f_1(X_1) f_1(X_{t+1}) - theta^2).
/// Lag covariances are exact for finite chains (t-step matrices), i.i.d.
/// models and window models over a discrete base. The tail bound is
/// range(f_1)^2 * sum_{t > T0} beta(t).
Sigma2Result yoshihara_sigma2(const ProcessSpec& spec, const ProjectionResult& projection,
                              std::size_t lag_cutoff, const Sigma2Options& options = {});

}  // namespace ustat
