#pragma once

#include <string>

namespace platoon {

/// Fixed-point with `digits` decimals; values that round to zero print without
/// a sign.
std::string format_fixed(double v, int digits = 9);

/// Scientific with 12 significant digits.
std::string format_sci(double v);

/// Shortest decimal that round-trips to the same double.
std::string format_shortest(double v);

}  // namespace platoon
