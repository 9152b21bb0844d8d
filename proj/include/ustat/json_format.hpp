#pragma once

#include <string>

#include "ustat/config.hpp"

namespace ustat {

/// Decimal text with 17 significant digits ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double v);

/// JSON text in which every floating-point number carries 17 significant
/// digits and non-finite numbers become null. Object keys keep nlohmann's
/// sorted order, so equal documents serialize to identical bytes.
std::string dump_json(const Json& j, int indent = 2);

}  // namespace ustat
