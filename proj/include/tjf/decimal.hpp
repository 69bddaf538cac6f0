// Copyright 2026 The TJF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TJF__DECIMAL_HPP_
#define TJF__DECIMAL_HPP_

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace tjf
{

/**
 * @brief Text form of a float32 value with 9 significant digits.
 *
 * Uses fixed notation ('.' radix, no exponent) for |v| < 1e6 and scientific
 * notation above. 9 significant digits make every float32 round-trip.
 */
inline std::string format_decimal(float value)
{
  char buf[128];
  if (value == 0.0f) {
    return std::signbit(value) ? "-0.00000000" : "0.00000000";
  }
  if (std::fabs(value) >= 1e6f || !std::isfinite(value)) {
    const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 8);
    return std::string(buf, r.ptr);
  }
  // Decimal exponent after rounding to 9 significant digits.
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 8);
  const std::string_view sci(buf, static_cast<std::size_t>(r.ptr - buf));
  const int exponent = std::atoi(std::string(sci.substr(sci.find('e') + 1)).c_str());
  const int decimals = 8 - exponent > 0 ? 8 - exponent : 0;
  const auto f = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  return std::string(buf, f.ptr);
}

inline std::optional<float> parse_decimal(std::string_view text)
{
  if (text.empty()) {
    return std::nullopt;
  }
  float out = 0.0f;
  const char * first = text.data();
  if (*first == '+') {
    return std::nullopt;
  }
  const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(out)) {
    return std::nullopt;
  }
  return out;
}

/// Rounds a double to the nearest float32 value.
inline double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace tjf

#endif  // TJF__DECIMAL_HPP_
