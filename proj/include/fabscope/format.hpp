// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace fabscope {

/// Display form: at most four decimals, trailing zeros trimmed ("37.5", "174").
std::string format_number(double value);

/// Shortest text that parses back to the same double.
std::string format_exact(double value);

}  // namespace fabscope
