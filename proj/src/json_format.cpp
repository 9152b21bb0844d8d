#include "ustat/json_format.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace ustat {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

namespace {

void write(std::ostringstream& os, const Json& j, int indent, int depth) {
  const std::string pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* newline = indent >= 0 ? "\n" : "";
  const char* colon = indent >= 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << newline;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << newline;
        first = false;
        os << pad << Json(it.key()).dump() << colon;
        write(os, it.value(), indent, depth + 1);
      }
      os << newline << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << newline;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << newline;
        first = false;
        os << pad;
        write(os, v, indent, depth + 1);
      }
      os << newline << close_pad << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
      } else {
        os << fmt::format("{:.17g}", v);
      }
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  return os.str();
}

}  // namespace ustat
