#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ustat/rng.hpp"

namespace ustat {

// Finite discrete law: support points with their probabilities.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

struct IidDiscrete {
  DiscreteLaw law;
};

struct IidUniform01 {};

// Bounded map applied to a window of w consecutive innovations.
struct WindowMap {
  std::string name;  // "mean", "sum", "max", "min", "product" or a custom label
  std::function<double(std::span<const double>)> apply;
};

WindowMap window_map(const std::string& name);

// X_t = g(e_t, ..., e_{t+w-1}) for i.i.d. innovations e.
struct MDependentWindow {
  std::size_t window = 1;
  std::variant<IidDiscrete, IidUniform01> base;
  WindowMap map;
};

struct FiniteMarkov {
  std::vector<double> states;
  Eigen::MatrixXd transition;
  Eigen::VectorXd stationary;  // filled in at construction
};

// Strictly stationary real-valued sequence model. Every instance is
// validated at construction; sampling never fails afterwards.
class ProcessSpec {
 public:
  using Model = std::variant<IidDiscrete, IidUniform01, MDependentWindow, FiniteMarkov>;

  static ProcessSpec iid_discrete(std::vector<double> alphabet, std::vector<double> probs);
  static ProcessSpec iid_uniform01();
  static ProcessSpec m_dependent(std::size_t window, std::variant<IidDiscrete, IidUniform01> base,
                                 WindowMap map);
  static ProcessSpec finite_markov(std::vector<double> states, Eigen::MatrixXd transition);
  // Two-state chain on {0, 1} with P(0->1) = p, P(1->0) = q.
  static ProcessSpec two_state_markov(double p, double q);

  const Model& model() const { return model_; }

  bool is_iid() const;
  // True when every path of finite length has finitely many outcomes.
  bool is_discrete() const;

  // Number of outcomes of one innovation symbol (alphabet or state count).
  // Only meaningful for discrete specs.
  std::size_t symbol_count() const;

  // Number of innovation symbols that determine a path of length n.
  std::size_t symbols_for_path(std::size_t n) const;

  // Exact marginal law of X_1 for discrete specs.
  std::optional<DiscreteLaw> marginal_law() const;

  // Short human-readable label.
  std::string describe() const;

 private:
  explicit ProcessSpec(Model m) : model_(std::move(m)) {}
  Model model_;
};

enum class Exactness { exact, upper_bound };

const char* to_string(Exactness e);

struct BetaValue {
  double value = 0.0;
  Exactness exactness = Exactness::exact;
};

/// Absolute-regularity coefficient at lag t >= 1.
///
/// For a finite Markov chain started in its stationary law the supremum over
/// the future sigma-algebra is attained on sigma(X_t), giving
/// sum_x pi(x) * TV(P^t(x, .), pi) with TV the half L1 distance. Independent
/// models return 0. Window models return exact 0 for t >= w and the trivial
/// upper bound 1 below the window length.
BetaValue beta_coefficient(const ProcessSpec& spec, std::size_t t);

// Lag -> beta(t) profile, either derived from a process or supplied as a
// bounding function such as t^(-h(t)).
class BetaProfile {
 public:
  BetaProfile(std::function<double(std::size_t)> fn, Exactness exactness)
      : fn_(std::move(fn)), exactness_(exactness) {}

  static BetaProfile from_process(const ProcessSpec& spec);

  double operator()(std::size_t t) const { return fn_(t); }
  Exactness exactness() const { return exactness_; }

 private:
  std::function<double(std::size_t)> fn_;
  Exactness exactness_;
};

/// Stationary distribution of an irreducible aperiodic row-stochastic matrix.
/// Throws ConfigError for non-stochastic, reducible or periodic input.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

// P - 1 pi', whose t-th power is P^t - 1 pi'.
Eigen::MatrixXd deviation_matrix(const FiniteMarkov& chain);

/// Deterministic path X_1..X_n for (spec, n, seed).
std::vector<double> sample_path(const ProcessSpec& spec, std::size_t n, std::uint64_t seed);

/// Path drawn from an existing stream.
std::vector<double> sample_path(const ProcessSpec& spec, std::size_t n, Rng& rng);
void sample_path_into(const ProcessSpec& spec, std::span<double> out, Rng& rng);

// Every path of a fixed length of a discrete spec, with its exact probability.
struct PathTable {
  std::size_t length = 0;
  std::vector<double> values;  // row-major, one row of `length` values per path
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  std::span<const double> path(std::size_t i) const {
    return {values.data() + i * length, length};
  }
};

inline constexpr std::uint64_t kDefaultEnumerationBudget = std::uint64_t{1} << 22;

/// Number of innovation sequences behind paths of length n, or nullopt on
/// overflow. Continuous specs return nullopt.
std::optional<std::uint64_t> path_outcome_count(const ProcessSpec& spec, std::size_t n);

/// Enumerates all paths of length n in odometer order (first position varies
/// slowest). Throws BudgetExceeded when the outcome count exceeds budget and
/// ConfigError for continuous specs.
void for_each_path(const ProcessSpec& spec, std::size_t n, std::uint64_t budget,
                   const std::function<void(std::span<const double>, double)>& visit);

PathTable enumerate_paths(const ProcessSpec& spec, std::size_t n,
                          std::uint64_t budget = kDefaultEnumerationBudget);

}  // namespace ustat
