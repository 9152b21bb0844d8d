#include "ustat/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "ustat/error.hpp"

namespace ustat {

namespace {

constexpr double kProbTolerance = 1e-12;

void validate_law(const DiscreteLaw& law, const char* what) {
  if (law.values.empty()) throw ConfigError(std::string(what) + ": alphabet is empty");
  if (law.values.size() != law.probs.size()) {
    throw ConfigError(std::string(what) + ": alphabet and probability vector differ in length");
  }
  double total = 0.0;
  for (double p : law.probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ConfigError(std::string(what) + ": probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    throw ConfigError(std::string(what) + ": probabilities must sum to 1");
  }
  for (double v : law.values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": alphabet values must be finite");
  }
}

std::size_t draw_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding leftovers land on the last positive-probability symbol.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

double draw_innovation(const std::variant<IidDiscrete, IidUniform01>& base, Rng& rng) {
  if (const auto* d = std::get_if<IidDiscrete>(&base)) {
    return d->law.values[draw_index(d->law.probs, rng.uniform01())];
  }
  return rng.uniform01();
}

// Boolean primitivity test: some power P^k with k <= (s-1)^2 + 1 is strictly
// positive iff the chain is irreducible and aperiodic (Wielandt).
bool is_primitive(const Eigen::MatrixXd& p) {
  const auto s = p.rows();
  using BoolMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  BoolMat base = (p.array() > 0.0).cast<int>();
  BoolMat power = base;
  const long limit = (s - 1) * (s - 1) + 1;
  for (long k = 1; k <= limit; ++k) {
    if ((power.array() > 0).all()) return true;
    BoolMat next = power * base;
    power = (next.array() > 0).cast<int>();
  }
  return (power.array() > 0).all();
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, std::size_t t) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd base = m;
  while (t > 0) {
    if (t & 1u) result = result * base;
    base = base * base;
    t >>= 1u;
  }
  return result;
}

double markov_beta(const FiniteMarkov& chain, std::size_t t) {
  // P^t - 1 pi' = (P - 1 pi')^t; powering the difference keeps tiny values
  // accurate instead of flooring at the round-off of P^t.
  const Eigen::MatrixXd dt = matrix_power(deviation_matrix(chain), t);
  double beta = 0.0;
  for (Eigen::Index x = 0; x < dt.rows(); ++x) beta += chain.stationary(x) * 0.5 * dt.row(x).cwiseAbs().sum();
  return std::clamp(beta, 0.0, 1.0);
}

}  // namespace

WindowMap window_map(const std::string& name) {
  WindowMap m;
  m.name = name;
  if (name == "mean") {
    m.apply = [](std::span<const double> xs) {
      return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
  } else if (name == "sum") {
    m.apply = [](std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); };
  } else if (name == "max") {
    m.apply = [](std::span<const double> xs) { return *std::max_element(xs.begin(), xs.end()); };
  } else if (name == "min") {
    m.apply = [](std::span<const double> xs) { return *std::min_element(xs.begin(), xs.end()); };
  } else if (name == "product") {
    m.apply = [](std::span<const double> xs) {
      return std::accumulate(xs.begin(), xs.end(), 1.0, std::multiplies<>());
    };
  } else {
    throw ConfigError("unknown window map '" + name + "' (expected mean, sum, max, min, product)");
  }
  return m;
}

ProcessSpec ProcessSpec::iid_discrete(std::vector<double> alphabet, std::vector<double> probs) {
  IidDiscrete d{DiscreteLaw{std::move(alphabet), std::move(probs)}};
  validate_law(d.law, "iid_discrete");
  return ProcessSpec(std::move(d));
}

ProcessSpec ProcessSpec::iid_uniform01() { return ProcessSpec(IidUniform01{}); }

ProcessSpec ProcessSpec::m_dependent(std::size_t window,
                                     std::variant<IidDiscrete, IidUniform01> base,
                                     WindowMap map) {
  if (window == 0) throw ConfigError("m_dependent_window: window must be positive");
  if (!map.apply) throw ConfigError("m_dependent_window: map is empty");
  if (const auto* d = std::get_if<IidDiscrete>(&base)) validate_law(d->law, "m_dependent_window base");
  return ProcessSpec(MDependentWindow{window, std::move(base), std::move(map)});
}

ProcessSpec ProcessSpec::finite_markov(std::vector<double> states, Eigen::MatrixXd transition) {
  if (states.empty()) throw ConfigError("finite_markov: no states");
  if (transition.rows() != static_cast<Eigen::Index>(states.size()) ||
      transition.cols() != static_cast<Eigen::Index>(states.size())) {
    throw ConfigError("finite_markov: transition matrix must be square with one row per state");
  }
  for (double v : states) {
    if (!std::isfinite(v)) throw ConfigError("finite_markov: state values must be finite");
  }
  FiniteMarkov chain{std::move(states), std::move(transition), {}};
  chain.stationary = stationary_distribution(chain.transition);
  return ProcessSpec(std::move(chain));
}

ProcessSpec ProcessSpec::two_state_markov(double p, double q) {
  Eigen::MatrixXd t(2, 2);
  t << 1.0 - p, p, q, 1.0 - q;
  return finite_markov({0.0, 1.0}, std::move(t));
}

bool ProcessSpec::is_iid() const {
  return std::holds_alternative<IidDiscrete>(model_) || std::holds_alternative<IidUniform01>(model_);
}

bool ProcessSpec::is_discrete() const {
  return std::visit(
      [](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidUniform01>) {
          return false;
        } else if constexpr (std::is_same_v<T, MDependentWindow>) {
          return std::holds_alternative<IidDiscrete>(m.base);
        } else {
          return true;
        }
      },
      model_);
}

std::size_t ProcessSpec::symbol_count() const {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidDiscrete>) {
          return m.law.values.size();
        } else if constexpr (std::is_same_v<T, FiniteMarkov>) {
          return m.states.size();
        } else if constexpr (std::is_same_v<T, MDependentWindow>) {
          if (const auto* d = std::get_if<IidDiscrete>(&m.base)) return d->law.values.size();
          return 0;
        } else {
          return 0;
        }
      },
      model_);
}

std::size_t ProcessSpec::symbols_for_path(std::size_t n) const {
  if (const auto* w = std::get_if<MDependentWindow>(&model_)) return n == 0 ? 0 : n + w->window - 1;
  return n;
}

std::optional<DiscreteLaw> ProcessSpec::marginal_law() const {
  return std::visit(
      [](const auto& m) -> std::optional<DiscreteLaw> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidDiscrete>) {
          return m.law;
        } else if constexpr (std::is_same_v<T, FiniteMarkov>) {
          return DiscreteLaw{m.states, std::vector<double>(m.stationary.data(),
                                                           m.stationary.data() + m.stationary.size())};
        } else if constexpr (std::is_same_v<T, MDependentWindow>) {
          const auto* d = std::get_if<IidDiscrete>(&m.base);
          if (!d) return std::nullopt;
          // Push the product law of w innovations through the window map.
          std::map<double, double> mass;
          const std::size_t k = d->law.values.size();
          std::vector<std::size_t> idx(m.window, 0);
          std::vector<double> window(m.window);
          while (true) {
            double p = 1.0;
            for (std::size_t i = 0; i < m.window; ++i) {
              window[i] = d->law.values[idx[i]];
              p *= d->law.probs[idx[i]];
            }
            if (p > 0.0) mass[m.map.apply(window)] += p;
            std::size_t pos = m.window;
            while (pos > 0 && ++idx[pos - 1] == k) idx[--pos] = 0;
            if (pos == 0) break;
          }
          DiscreteLaw law;
          for (const auto& [v, p] : mass) {
            law.values.push_back(v);
            law.probs.push_back(p);
          }
          return law;
        } else {
          return std::nullopt;
        }
      },
      model_);
}

std::string ProcessSpec::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidDiscrete>) {
          os << "iid_discrete(" << m.law.values.size() << " symbols)";
        } else if constexpr (std::is_same_v<T, IidUniform01>) {
          os << "iid_uniform01";
        } else if constexpr (std::is_same_v<T, MDependentWindow>) {
          os << "m_dependent_window(w=" << m.window << ", map=" << m.map.name << ")";
        } else {
          os << "finite_markov(" << m.states.size() << " states)";
        }
      },
      model_);
  return os.str();
}

const char* to_string(Exactness e) { return e == Exactness::exact ? "exact" : "upper_bound"; }

BetaValue beta_coefficient(const ProcessSpec& spec, std::size_t t) {
  if (t == 0) throw PreconditionViolation("beta_coefficient: lag must be >= 1");
  return std::visit(
      [t](const auto& m) -> BetaValue {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MDependentWindow>) {
          if (t >= m.window) return {0.0, Exactness::exact};
          return {1.0, Exactness::upper_bound};
        } else if constexpr (std::is_same_v<T, FiniteMarkov>) {
          return {markov_beta(m, t), Exactness::exact};
        } else {
          return {0.0, Exactness::exact};
        }
      },
      spec.model());
}

Eigen::MatrixXd deviation_matrix(const FiniteMarkov& chain) {
  Eigen::MatrixXd q = chain.transition;
  q.rowwise() -= chain.stationary.transpose();
  return q;
}

BetaProfile BetaProfile::from_process(const ProcessSpec& spec) {
  const bool exact = !std::holds_alternative<MDependentWindow>(spec.model());
  return BetaProfile([spec](std::size_t t) { return beta_coefficient(spec, t).value; },
                     exact ? Exactness::exact : Exactness::upper_bound);
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p) {
  const auto s = p.rows();
  if (s == 0 || p.cols() != s) throw ConfigError("transition matrix must be square and nonempty");
  for (Eigen::Index i = 0; i < s; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < s; ++j) {
      if (!std::isfinite(p(i, j)) || p(i, j) < 0.0) {
        throw ConfigError("transition matrix entries must be finite and nonnegative");
      }
      row += p(i, j);
    }
    if (std::abs(row - 1.0) > kProbTolerance) {
      throw ConfigError("transition matrix is not row-stochastic (row " + std::to_string(i) + ")");
    }
  }
  if (!is_primitive(p)) throw ConfigError("transition matrix is not irreducible and aperiodic");

  // Solve pi (P - I) = 0 with the last balance equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(s, s);
  a.row(s - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs(s - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(rhs);

  const double residual = (pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff();
  if (!pi.allFinite() || residual > 1e-9 || (pi.array() <= 0.0).any()) {
    throw ConfigError("stationary distribution could not be computed");
  }
  return pi / pi.sum();
}

void sample_path_into(const ProcessSpec& spec, std::span<double> out, Rng& rng) {
  const std::size_t n = out.size();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidDiscrete>) {
          for (std::size_t t = 0; t < n; ++t) out[t] = m.law.values[draw_index(m.law.probs, rng.uniform01())];
        } else if constexpr (std::is_same_v<T, IidUniform01>) {
          for (std::size_t t = 0; t < n; ++t) out[t] = rng.uniform01();
        } else if constexpr (std::is_same_v<T, MDependentWindow>) {
          std::vector<double> innovations(n + m.window - 1);
          for (auto& e : innovations) e = draw_innovation(m.base, rng);
          for (std::size_t t = 0; t < n; ++t) {
            out[t] = m.map.apply(std::span<const double>(innovations.data() + t, m.window));
          }
        } else {
          if (n == 0) return;
          const auto& pi = m.stationary;
          std::size_t state = draw_index(std::span<const double>(pi.data(), pi.size()), rng.uniform01());
          out[0] = m.states[state];
          std::vector<double> row(m.states.size());
          for (std::size_t t = 1; t < n; ++t) {
            for (std::size_t j = 0; j < row.size(); ++j) {
              row[j] = m.transition(static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(j));
            }
            state = draw_index(row, rng.uniform01());
            out[t] = m.states[state];
          }
        }
      },
      spec.model());
}

std::vector<double> sample_path(const ProcessSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  sample_path_into(spec, out, rng);
  return out;
}

std::vector<double> sample_path(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionViolation("sample_path: n must be >= 1");
  Rng rng(seed);
  return sample_path(spec, n, rng);
}

std::optional<std::uint64_t> path_outcome_count(const ProcessSpec& spec, std::size_t n) {
  if (!spec.is_discrete()) return std::nullopt;
  const std::uint64_t k = spec.symbol_count();
  const std::size_t len = spec.symbols_for_path(n);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < len; ++i) {
    if (count > std::numeric_limits<std::uint64_t>::max() / k) return std::nullopt;
    count *= k;
  }
  return count;
}

void for_each_path(const ProcessSpec& spec, std::size_t n, std::uint64_t budget,
                   const std::function<void(std::span<const double>, double)>& visit) {
  if (!spec.is_discrete()) throw ConfigError("exact path enumeration requires a discrete process");
  const auto count = path_outcome_count(spec, n);
  if (!count || *count > budget) {
    throw BudgetExceeded("exact enumeration of paths of length " + std::to_string(n) +
                         " exceeds the budget of " + std::to_string(budget) +
                         " outcomes; use Monte Carlo instead");
  }
  const std::size_t k = spec.symbol_count();
  const std::size_t len = spec.symbols_for_path(n);
  std::vector<std::size_t> idx(len, 0);
  std::vector<double> path(n);

  auto emit = [&](const auto& m) {
    using T = std::decay_t<decltype(m)>;
    double p = 1.0;
    if constexpr (std::is_same_v<T, IidDiscrete>) {
      for (std::size_t t = 0; t < n; ++t) {
        path[t] = m.law.values[idx[t]];
        p *= m.law.probs[idx[t]];
      }
    } else if constexpr (std::is_same_v<T, FiniteMarkov>) {
      p = m.stationary(static_cast<Eigen::Index>(idx[0]));
      path[0] = m.states[idx[0]];
      for (std::size_t t = 1; t < n; ++t) {
        p *= m.transition(static_cast<Eigen::Index>(idx[t - 1]), static_cast<Eigen::Index>(idx[t]));
        path[t] = m.states[idx[t]];
      }
    } else if constexpr (std::is_same_v<T, MDependentWindow>) {
      const auto& law = std::get<IidDiscrete>(m.base).law;
      std::vector<double> innovations(len);
      for (std::size_t i = 0; i < len; ++i) {
        innovations[i] = law.values[idx[i]];
        p *= law.probs[idx[i]];
      }
      for (std::size_t t = 0; t < n; ++t) {
        path[t] = m.map.apply(std::span<const double>(innovations.data() + t, m.window));
      }
    }
    if (p > 0.0) visit(path, p);
  };

  while (true) {
    std::visit(emit, spec.model());
    std::size_t pos = len;
    while (pos > 0 && ++idx[pos - 1] == k) idx[--pos] = 0;
    if (pos == 0) break;
  }
}

PathTable enumerate_paths(const ProcessSpec& spec, std::size_t n, std::uint64_t budget) {
  PathTable table;
  table.length = n;
  for_each_path(spec, n, budget, [&](std::span<const double> path, double p) {
    table.values.insert(table.values.end(), path.begin(), path.end());
    table.probs.push_back(p);
  });
  return table;
}

}  // namespace ustat
