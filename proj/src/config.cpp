#include "ustat/config.hpp"

#include <cmath>

#include "ustat/error.hpp"

namespace ustat {

namespace {

const Json& member(const Json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(context + ": missing key '" + key + "'");
  return *it;
}

double as_number(const Json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(what + " must be finite");
  return d;
}

std::size_t as_size(const Json& v, const std::string& what) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError(what + " must be a nonnegative integer");
  }
  if (v.is_number_integer() && v.get<long long>() < 0) throw ConfigError(what + " must be nonnegative");
  return v.get<std::size_t>();
}

std::vector<double> as_number_array(const Json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, what + " entry"));
  return out;
}

}  // namespace

void require_object(const Json& j, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& context) {
  require_object(j, context);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) known = known || it.key() == a;
    if (!known) throw ConfigError(context + ": unknown key '" + it.key() + "'");
  }
}

double get_number(const Json& j, const char* key, const std::string& context) {
  return as_number(member(j, key, context), context + "." + key);
}

double get_number_or(const Json& j, const char* key, double fallback, const std::string& context) {
  return j.contains(key) ? get_number(j, key, context) : fallback;
}

std::size_t get_size(const Json& j, const char* key, const std::string& context) {
  return as_size(member(j, key, context), context + "." + key);
}

std::size_t get_size_or(const Json& j, const char* key, std::size_t fallback, const std::string& context) {
  return j.contains(key) ? get_size(j, key, context) : fallback;
}

std::string get_string_or(const Json& j, const char* key, const std::string& fallback,
                          const std::string& context) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(context + "." + key + " must be a string");
  return v.get<std::string>();
}

bool get_bool_or(const Json& j, const char* key, bool fallback, const std::string& context) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(context + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::vector<double> get_number_array(const Json& j, const char* key, const std::string& context) {
  return as_number_array(member(j, key, context), context + "." + key);
}

std::vector<std::size_t> get_size_array(const Json& j, const char* key, const std::string& context) {
  const auto& v = member(j, key, context);
  if (!v.is_array()) throw ConfigError(context + "." + key + " must be an array of integers");
  std::vector<std::size_t> out;
  for (const auto& x : v) out.push_back(as_size(x, context + "." + key + " entry"));
  return out;
}

ProcessSpec parse_process(const Json& j) {
  const std::string ctx = "process";
  require_object(j, ctx);
  const auto& type_v = member(j, "type", ctx);
  if (!type_v.is_string()) throw ConfigError("process.type must be a string");
  const std::string type = type_v.get<std::string>();
  if (type == "iid_discrete") {
    check_keys(j, {"type", "alphabet", "probs"}, ctx);
    return ProcessSpec::iid_discrete(get_number_array(j, "alphabet", ctx), get_number_array(j, "probs", ctx));
  }
  if (type == "iid_uniform01") {
    check_keys(j, {"type"}, ctx);
    return ProcessSpec::iid_uniform01();
  }
  if (type == "m_dependent_window") {
    check_keys(j, {"type", "window", "map", "base"}, ctx);
    const ProcessSpec base = parse_process(member(j, "base", ctx));
    std::variant<IidDiscrete, IidUniform01> base_model;
    if (const auto* d = std::get_if<IidDiscrete>(&base.model())) {
      base_model = *d;
    } else if (std::holds_alternative<IidUniform01>(base.model())) {
      base_model = IidUniform01{};
    } else {
      throw ConfigError("process.base must be iid_discrete or iid_uniform01");
    }
    return ProcessSpec::m_dependent(get_size(j, "window", ctx), std::move(base_model),
                                    window_map(get_string_or(j, "map", "mean", ctx)));
  }
  if (type == "finite_markov") {
    check_keys(j, {"type", "states", "transition"}, ctx);
    auto states = get_number_array(j, "states", ctx);
    const auto& rows = member(j, "transition", ctx);
    if (!rows.is_array()) throw ConfigError("process.transition must be an array of rows");
    Eigen::MatrixXd p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(states.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = as_number_array(rows[i], "process.transition row");
      if (row.size() != states.size()) throw ConfigError("process.transition rows must have one entry per state");
      for (std::size_t k = 0; k < row.size(); ++k) {
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
      }
    }
    return ProcessSpec::finite_markov(std::move(states), std::move(p));
  }
  throw ConfigError("unknown process type '" + type + "'");
}

Json process_to_json(const ProcessSpec& spec) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IidDiscrete>) {
          return {{"type", "iid_discrete"}, {"alphabet", m.law.values}, {"probs", m.law.probs}};
        } else if constexpr (std::is_same_v<T, IidUniform01>) {
          return {{"type", "iid_uniform01"}};
        } else if constexpr (std::is_same_v<T, MDependentWindow>) {
          Json base = std::holds_alternative<IidDiscrete>(m.base)
                          ? Json{{"type", "iid_discrete"},
                                 {"alphabet", std::get<IidDiscrete>(m.base).law.values},
                                 {"probs", std::get<IidDiscrete>(m.base).law.probs}}
                          : Json{{"type", "iid_uniform01"}};
          return {{"type", "m_dependent_window"}, {"window", m.window}, {"map", m.map.name}, {"base", base}};
        } else {
          Json rows = Json::array();
          for (Eigen::Index i = 0; i < m.transition.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(m.transition.cols()));
            for (Eigen::Index k = 0; k < m.transition.cols(); ++k) row[static_cast<std::size_t>(k)] = m.transition(i, k);
            rows.push_back(row);
          }
          return {{"type", "finite_markov"}, {"states", m.states}, {"transition", rows}};
        }
      },
      spec.model());
}

Kernel parse_kernel(const Json& j) {
  const std::string ctx = "kernel";
  check_keys(j, {"name", "params"}, ctx);
  const auto& name = member(j, "name", ctx);
  if (!name.is_string()) throw ConfigError("kernel.name must be a string");
  KernelParams params;
  if (j.contains("params")) {
    const auto& p = j.at("params");
    require_object(p, "kernel.params");
    for (auto it = p.begin(); it != p.end(); ++it) params[it.key()] = as_number(it.value(), "kernel.params." + it.key());
  }
  return builtin_kernel(name.get<std::string>(), params);
}

}  // namespace ustat
