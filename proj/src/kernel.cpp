#include "ustat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

#include "ustat/error.hpp"
#include "ustat/summation.hpp"

namespace ustat {

namespace {

double param_or(const KernelParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double required_param(const std::string& kernel, const KernelParams& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("kernel " + kernel + ": missing parameter '" + key + "'");
  return it->second;
}

void check_params(const std::string& kernel, const KernelParams& params,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("kernel " + kernel + ": unknown parameter '" + key + "'");
    if (!std::isfinite(value)) throw ConfigError("kernel " + kernel + ": parameter '" + key + "' is not finite");
  }
}

double positive_bound(const std::string& kernel, double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError("kernel " + kernel + ": '" + key + "' must be positive");
  return v;
}

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// Visits every r-tuple of support indices with its product probability.
template <typename Visit>
void for_each_support_tuple(const DiscreteLaw& law, std::size_t r, Visit&& visit) {
  const std::size_t k = law.values.size();
  std::vector<std::size_t> idx(r, 0);
  std::vector<double> vals(r);
  if (r == 0) {
    visit(std::span<const double>(vals), 1.0);
    return;
  }
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < r; ++i) {
      vals[i] = law.values[idx[i]];
      p *= law.probs[idx[i]];
    }
    if (p > 0.0) visit(std::span<const double>(vals), p);
    std::size_t pos = r;
    while (pos > 0 && ++idx[pos - 1] == k) idx[--pos] = 0;
    if (pos == 0) break;
  }
}

double sample_marginal(const ProcessSpec& spec, Rng& rng) {
  double x = 0.0;
  sample_path_into(spec, std::span<double>(&x, 1), rng);
  return x;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double n = static_cast<double>(xs.size());
  const double mean = s.value() / n;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - mean) * (x - mean));
  const double var = xs.size() > 1 ? ss.value() / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

Kernel::Kernel(Traits traits, EvalFn eval, PairFn pair)
    : traits_(std::move(traits)), eval_(std::move(eval)), pair_(std::move(pair)) {
  if (traits_.order == 0) throw ConfigError("kernel order must be positive");
  if (!(traits_.bound >= 0.0) || !std::isfinite(traits_.bound)) {
    throw ConfigError("kernel bound must be finite and nonnegative");
  }
  if (!eval_) throw ConfigError("kernel evaluation function is empty");
  if (pair_ && traits_.order != 2) throw ConfigError("pair shortcut requires an order-2 kernel");
}

Kernel Kernel::constant(std::size_t order, double value) {
  Kernel k({"constant", order, std::abs(value), true, false},
           [value](std::span<const std::size_t>, std::span<const double>) { return value; },
           order == 2 ? PairFn([value](std::size_t, std::size_t, double, double) { return value; })
                      : PairFn{});
  k.constant_ = value;
  return k;
}

std::vector<std::string> builtin_kernel_names() {
  return {"product", "match_indicator", "kendall_sign", "clipped_gini",
          "weighted_product", "degenerate_product", "identity", "constant"};
}

Kernel builtin_kernel(const std::string& name, const KernelParams& params) {
  if (name == "product") {
    check_params(name, params, {"value_bound"});
    const double b = positive_bound(name, param_or(params, "value_bound", 1.0), "value_bound");
    return Kernel({name, 2, b * b, true, false},
                  [](auto, std::span<const double> x) { return x[0] * x[1]; },
                  [](std::size_t, std::size_t, double x, double y) { return x * y; });
  }
  if (name == "match_indicator") {
    check_params(name, params, {});
    return Kernel({name, 2, 1.0, true, false},
                  [](auto, std::span<const double> x) { return x[0] == x[1] ? 1.0 : 0.0; },
                  [](std::size_t, std::size_t, double x, double y) { return x == y ? 1.0 : 0.0; });
  }
  if (name == "kendall_sign") {
    check_params(name, params, {});
    return Kernel({name, 2, 1.0, false, false},
                  [](auto, std::span<const double> x) { return sign(x[0] - x[1]); },
                  [](std::size_t, std::size_t, double x, double y) { return sign(x - y); });
  }
  if (name == "clipped_gini") {
    check_params(name, params, {"clip"});
    const double clip = positive_bound(name, required_param(name, params, "clip"), "clip");
    return Kernel({name, 2, clip, true, false},
                  [clip](auto, std::span<const double> x) { return std::min(std::abs(x[0] - x[1]), clip); },
                  [clip](std::size_t, std::size_t, double x, double y) { return std::min(std::abs(x - y), clip); });
  }
  if (name == "weighted_product") {
    check_params(name, params, {"value_bound", "omega"});
    const double b = positive_bound(name, param_or(params, "value_bound", 1.0), "value_bound");
    const double omega = param_or(params, "omega", std::numbers::pi);
    auto weight = [omega](std::size_t i, std::size_t j) {
      return std::cos(omega * static_cast<double>(i + j));
    };
    return Kernel({name, 2, b * b, true, true},
                  [weight](std::span<const std::size_t> idx, std::span<const double> x) {
                    return weight(idx[0], idx[1]) * x[0] * x[1];
                  },
                  [weight](std::size_t i, std::size_t j, double x, double y) { return weight(i, j) * x * y; });
  }
  if (name == "degenerate_product") {
    check_params(name, params, {"mu", "value_bound"});
    const double mu = required_param(name, params, "mu");
    const double b = positive_bound(name, param_or(params, "value_bound", 1.0), "value_bound");
    const double radius = b + std::abs(mu);
    return Kernel({name, 2, radius * radius, true, false},
                  [mu](auto, std::span<const double> x) { return (x[0] - mu) * (x[1] - mu); },
                  [mu](std::size_t, std::size_t, double x, double y) { return (x - mu) * (y - mu); });
  }
  if (name == "identity") {
    check_params(name, params, {"value_bound"});
    const double b = positive_bound(name, param_or(params, "value_bound", 1.0), "value_bound");
    return Kernel({name, 1, b, true, false}, [](auto, std::span<const double> x) { return x[0]; });
  }
  if (name == "constant") {
    check_params(name, params, {"value", "order"});
    const double order = param_or(params, "order", 2.0);
    if (order < 1.0 || order != std::floor(order) || order > 16.0) {
      throw ConfigError("kernel constant: 'order' must be an integer in [1, 16]");
    }
    return Kernel::constant(static_cast<std::size_t>(order), required_param(name, params, "value"));
  }
  throw ConfigError("unknown kernel '" + name + "'");
}

ProjectionResult hoeffding_projection(const ProcessSpec& spec, const Kernel& kernel,
                                      const ProjectionOptions& options) {
  if (kernel.index_dependent()) {
    throw PreconditionViolation("Hoeffding projection is undefined for index-dependent kernels");
  }
  if (!kernel.symmetric()) {
    throw PreconditionViolation("Hoeffding projection requires a symmetric kernel");
  }
  const std::size_t r = kernel.order();
  std::vector<std::size_t> positions(r);
  for (std::size_t i = 0; i < r; ++i) positions[i] = i + 1;

  ProjectionResult out;
  out.kernel = std::make_shared<const Kernel>(kernel);
  out.spec = std::make_shared<const ProcessSpec>(spec);

  if (auto law = spec.marginal_law()) {
    out.exact = true;
    auto kernel_ptr = out.kernel;
    auto law_copy = *law;
    // f_1(x) by exact enumeration of the remaining r - 1 arguments.
    out.f1 = [kernel_ptr, law_copy, positions](double x) {
      const std::size_t r = kernel_ptr->order();
      std::vector<double> args(r);
      args[0] = x;
      CompensatedSum acc;
      for_each_support_tuple(law_copy, r - 1, [&](std::span<const double> rest, double p) {
        std::copy(rest.begin(), rest.end(), args.begin() + 1);
        acc.add(p * (*kernel_ptr)(positions, args));
      });
      return acc.value();
    };
    CompensatedSum theta;
    out.f1_table.reserve(law->values.size());
    for (std::size_t a = 0; a < law->values.size(); ++a) {
      const double f1 = out.f1(law->values[a]);
      out.f1_table.push_back(f1);
      theta.add(law->probs[a] * f1);
    }
    out.theta = theta.value();
    out.theta_se = 0.0;
    out.marginal = std::move(law);
    return out;
  }

  Rng rng(options.seed, {0x7e7a});
  const std::size_t s = std::max<std::size_t>(options.samples, 2);
  std::vector<double> draws(s);
  std::vector<double> args(r);
  for (std::size_t i = 0; i < s; ++i) {
    for (auto& a : args) a = sample_marginal(spec, rng);
    draws[i] = kernel(positions, args);
  }
  const auto est = mean_and_se(draws);
  out.theta = est.mean;
  out.theta_se = est.se;

  const std::size_t bank_size = std::max<std::size_t>(options.inner_samples, 1);
  auto bank = std::make_shared<std::vector<double>>(bank_size * (r - 1));
  Rng bank_rng(options.seed, {0xba4c});
  for (auto& v : *bank) v = sample_marginal(spec, bank_rng);
  auto kernel_ptr = out.kernel;
  out.f1 = [kernel_ptr, bank, bank_size, positions](double x) {
    const std::size_t r = kernel_ptr->order();
    std::vector<double> a(r);
    a[0] = x;
    CompensatedSum acc;
    for (std::size_t b = 0; b < bank_size; ++b) {
      std::copy_n(bank->begin() + static_cast<std::ptrdiff_t>(b * (r - 1)), r - 1, a.begin() + 1);
      acc.add((*kernel_ptr)(positions, a));
    }
    return acc.value() / static_cast<double>(bank_size);
  };
  return out;
}

namespace {

// Sum of beta(t) for t > lag_cutoff.
double beta_tail_sum(const ProcessSpec& spec, std::size_t lag_cutoff) {
  if (spec.is_iid()) return 0.0;
  if (const auto* w = std::get_if<MDependentWindow>(&spec.model())) {
    return w->window > lag_cutoff + 1 ? static_cast<double>(w->window - 1 - lag_cutoff) : 0.0;
  }
  const auto& chain = std::get<FiniteMarkov>(spec.model());
  const Eigen::MatrixXd q = deviation_matrix(chain);
  Eigen::MatrixXd qt = Eigen::MatrixXd::Identity(q.rows(), q.cols());
  for (std::size_t t = 0; t <= lag_cutoff; ++t) qt = qt * q;
  CompensatedSum tail;
  for (std::size_t t = lag_cutoff + 1; t <= lag_cutoff + 100000; ++t) {
    double beta = 0.0;
    for (Eigen::Index x = 0; x < qt.rows(); ++x) beta += chain.stationary(x) * 0.5 * qt.row(x).cwiseAbs().sum();
    tail.add(beta);
    if (beta <= 1e-17 * tail.value()) break;
    qt = qt * q;
  }
  return tail.value();
}

}  // namespace

Sigma2Result yoshihara_sigma2(const ProcessSpec& spec, const ProjectionResult& projection,
                              std::size_t lag_cutoff, const Sigma2Options& options) {
  if (lag_cutoff == 0) throw PreconditionViolation("yoshihara_sigma2: lag cutoff must be >= 1");
  if (!projection.kernel || !projection.f1) {
    throw PreconditionViolation("yoshihara_sigma2: projection is incomplete");
  }
  const Kernel& kernel = *projection.kernel;
  const double bound = kernel.bound();
  const double theta = projection.theta;

  Sigma2Result out;
  out.lag_cutoff = lag_cutoff;
  out.lag_terms.assign(lag_cutoff, 0.0);
  out.tolerance = options.tolerance.value_or(1e-6 * bound * bound);

  if (projection.exact) {
    const auto& law = *projection.marginal;
    const auto& f1 = projection.f1_table;
    CompensatedSum second;
    for (std::size_t a = 0; a < f1.size(); ++a) second.add(law.probs[a] * f1[a] * f1[a]);
    out.variance_term = second.value() - theta * theta;

    if (const auto* chain = std::get_if<FiniteMarkov>(&spec.model())) {
      // v_t = P^t f_1; lag term = sum_x pi(x) f_1(x) v_t(x) - theta^2.
      Eigen::VectorXd f1v = Eigen::Map<const Eigen::VectorXd>(f1.data(), static_cast<Eigen::Index>(f1.size()));
      Eigen::VectorXd v = f1v;
      for (std::size_t t = 1; t <= lag_cutoff; ++t) {
        v = chain->transition * v;
        CompensatedSum cross;
        for (Eigen::Index x = 0; x < v.size(); ++x) cross.add(chain->stationary(x) * f1v(x) * v(x));
        out.lag_terms[t - 1] = cross.value() - theta * theta;
      }
    } else if (const auto* window = std::get_if<MDependentWindow>(&spec.model())) {
      const auto& base = std::get<IidDiscrete>(window->base).law;
      std::unordered_map<double, double> cache;
      auto f1_at = [&](double x) {
        auto it = cache.find(x);
        if (it != cache.end()) return it->second;
        return cache[x] = projection.f1(x);
      };
      const std::size_t w = window->window;
      for (std::size_t t = 1; t <= lag_cutoff && t < w; ++t) {
        const std::size_t len = w + t;
        double count = std::pow(static_cast<double>(base.values.size()), static_cast<double>(len));
        if (count > static_cast<double>(options.budget)) {
          throw BudgetExceeded("yoshihara_sigma2: lag " + std::to_string(t) +
                               " joint law exceeds the enumeration budget");
        }
        CompensatedSum cross;
        for_each_support_tuple(base, len, [&](std::span<const double> e, double p) {
          const double x1 = window->map.apply(e.subspan(0, w));
          const double x2 = window->map.apply(e.subspan(t, w));
          cross.add(p * f1_at(x1) * f1_at(x2));
        });
        out.lag_terms[t - 1] = cross.value() - theta * theta;
      }
    }
    CompensatedSum total;
    total.add(out.variance_term);
    for (double lag : out.lag_terms) total.add(2.0 * lag);
    out.value = total.value();
    out.standard_error = 0.0;
  } else {
    // Unbiased per-replicate estimator built from independent copies:
    //   f(X1,Y) f(X1,Y') + 2 sum_t f(X1,Y) f(X_{1+t},Y') - (1 + 2L) f(A,B) f(C,D)
    // where Y, Y', B, D are (r-1)-tuples of independent marginal draws.
    const std::size_t r = kernel.order();
    std::vector<std::size_t> positions(r);
    for (std::size_t i = 0; i < r; ++i) positions[i] = i + 1;
    std::size_t dependent_lags = 0;
    if (const auto* window = std::get_if<MDependentWindow>(&spec.model())) {
      dependent_lags = std::min(lag_cutoff, window->window - 1);
    }
    const std::size_t s = std::max<std::size_t>(options.samples, 2);
    Rng rng(options.seed, {0x5162});
    std::vector<double> totals(s), var_terms(s);
    std::vector<std::vector<double>> lag_samples(dependent_lags, std::vector<double>(s));
    std::vector<double> path(dependent_lags + 1);
    std::vector<double> a(r), b(r);
    auto draw_tail = [&](std::vector<double>& args) {
      for (std::size_t i = 1; i < r; ++i) args[i] = sample_marginal(spec, rng);
    };
    for (std::size_t i = 0; i < s; ++i) {
      sample_path_into(spec, path, rng);
      a[0] = path[0];
      draw_tail(a);
      const double fxy = kernel(positions, a);
      b[0] = path[0];
      draw_tail(b);
      const double fxy2 = kernel(positions, b);
      a[0] = sample_marginal(spec, rng);
      draw_tail(a);
      b[0] = sample_marginal(spec, rng);
      draw_tail(b);
      const double theta_sq = kernel(positions, a) * kernel(positions, b);
      var_terms[i] = fxy * fxy2 - theta_sq;
      double acc = var_terms[i];
      for (std::size_t t = 1; t <= dependent_lags; ++t) {
        b[0] = path[t];
        draw_tail(b);
        const double lag = fxy * kernel(positions, b) - theta_sq;
        lag_samples[t - 1][i] = lag;
        acc += 2.0 * lag;
      }
      totals[i] = acc;
    }
    const auto est = mean_and_se(totals);
    out.value = est.mean;
    out.standard_error = est.se;
    out.variance_term = mean_and_se(var_terms).mean;
    for (std::size_t t = 0; t < dependent_lags; ++t) out.lag_terms[t] = mean_and_se(lag_samples[t]).mean;
  }

  double range = 2.0 * bound;
  if (projection.exact && !projection.f1_table.empty()) {
    const auto [lo, hi] = std::minmax_element(projection.f1_table.begin(), projection.f1_table.end());
    range = *hi - *lo;
  }
  out.tail_bound = range * range * beta_tail_sum(spec, lag_cutoff);
  out.tail_warning = out.tail_bound > out.tolerance;
  return out;
}

}  // namespace ustat
