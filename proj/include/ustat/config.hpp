#pragma once

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "ustat/kernel.hpp"
#include "ustat/process.hpp"

namespace ustat {

using Json = nlohmann::json;

// Strict JSON configuration helpers. Every parser rejects unknown keys and
// wrong types with ConfigError.

void require_object(const Json& j, const std::string& context);
void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& context);

double get_number(const Json& j, const char* key, const std::string& context);
double get_number_or(const Json& j, const char* key, double fallback, const std::string& context);
std::size_t get_size(const Json& j, const char* key, const std::string& context);
std::size_t get_size_or(const Json& j, const char* key, std::size_t fallback, const std::string& context);
std::string get_string_or(const Json& j, const char* key, const std::string& fallback,
                          const std::string& context);
bool get_bool_or(const Json& j, const char* key, bool fallback, const std::string& context);
std::vector<double> get_number_array(const Json& j, const char* key, const std::string& context);
std::vector<std::size_t> get_size_array(const Json& j, const char* key, const std::string& context);

/// Process schema:
///   {"type": "iid_discrete", "alphabet": [..], "probs": [..]}
///   {"type": "iid_uniform01"}
///   {"type": "m_dependent_window", "window": w, "map": "mean", "base": {iid process}}
///   {"type": "finite_markov", "states": [..], "transition": [[..], ..]}
ProcessSpec parse_process(const Json& j);
Json process_to_json(const ProcessSpec& spec);

/// Kernel schema: {"name": "clipped_gini", "params": {"clip": 1.0}}
Kernel parse_kernel(const Json& j);

}  // namespace ustat
