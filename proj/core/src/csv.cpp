#include "platoon/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace platoon {
namespace {

template <class... Args>
std::string to_chars_string(double v, Args... args) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, args...);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

std::string format_fixed(double v, int digits) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0;
  return to_chars_string(v, std::chars_format::fixed, digits);
}

std::string format_sci(double v) { return to_chars_string(v, std::chars_format::scientific, 11); }

std::string format_shortest(double v) { return to_chars_string(v); }

}  // namespace platoon
