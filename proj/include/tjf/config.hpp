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

#ifndef TJF__CONFIG_HPP_
#define TJF__CONFIG_HPP_

#include "tjf/error.hpp"

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tjf
{

/**
 * @brief Ordered key=value configuration.
 *
 * Text form: one `key=value` per line, `#` starts a comment line, blank
 * lines ignored. Getters throw InvalidConfig naming the offending key, and
 * `reject_unknown` rejects keys no getter asked for.
 */
class KeyValueConfig
{
public:
  KeyValueConfig() = default;
  explicit KeyValueConfig(std::vector<std::pair<std::string, std::string>> fields)
  : fields_(std::move(fields))
  {
  }

  static KeyValueConfig parse(const std::string & text)
  {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') {
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": missing '='");
      }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) {
        throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": empty key");
      }
      if (cfg.has(key)) {
        throw Error(ErrorCode::InvalidConfig, key + ": duplicate key");
      }
      cfg.fields_.emplace_back(key, trim(t.substr(eq + 1)));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string & path)
  {
    std::ifstream f(path);
    if (!f) {
      throw Error(ErrorCode::IoError, "cannot read " + path);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string & key) const
  {
    for (const auto & [k, v] : fields_) {
      if (k == key) {
        return true;
      }
    }
    return false;
  }

  const std::vector<std::pair<std::string, std::string>> & fields() const noexcept
  {
    return fields_;
  }

  void set(const std::string & key, const std::string & value)
  {
    for (auto & [k, v] : fields_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    fields_.emplace_back(key, value);
  }

  std::string to_text() const
  {
    std::string out;
    for (const auto & [k, v] : fields_) {
      out += k + "=" + v + "\n";
    }
    return out;
  }

  std::string get_string(const std::string & key, const std::string & fallback) const
  {
    used_.insert(key);
    for (const auto & [k, v] : fields_) {
      if (k == key) {
        return v;
      }
    }
    return fallback;
  }

  std::size_t get_size(const std::string & key, std::size_t fallback) const
  {
    return static_cast<std::size_t>(get_integer<std::uint64_t>(key, fallback));
  }

  std::uint64_t get_u64(const std::string & key, std::uint64_t fallback) const
  {
    return get_integer<std::uint64_t>(key, fallback);
  }

  double get_double(const std::string & key, double fallback) const
  {
    used_.insert(key);
    const std::string * v = find(key);
    if (!v) {
      return fallback;
    }
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw Error(ErrorCode::InvalidConfig, key + ": expected a number, got '" + *v + "'");
    }
    return out;
  }

  bool get_bool(const std::string & key, bool fallback) const
  {
    used_.insert(key);
    const std::string * v = find(key);
    if (!v) {
      return fallback;
    }
    if (*v == "true" || *v == "1") {
      return true;
    }
    if (*v == "false" || *v == "0") {
      return false;
    }
    throw Error(ErrorCode::InvalidConfig, key + ": expected true/false, got '" + *v + "'");
  }

  /// Throws InvalidConfig for the first key that no getter has read.
  void reject_unknown() const
  {
    for (const auto & [k, v] : fields_) {
      if (!used_.count(k)) {
        throw Error(ErrorCode::InvalidConfig, k + ": unknown key");
      }
    }
  }

private:
  template <typename I>
  I get_integer(const std::string & key, I fallback) const
  {
    used_.insert(key);
    const std::string * v = find(key);
    if (!v) {
      return fallback;
    }
    I out{};
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw Error(ErrorCode::InvalidConfig, key + ": expected a non-negative integer, got '" + *v + "'");
    }
    return out;
  }

  const std::string * find(const std::string & key) const
  {
    for (const auto & [k, v] : fields_) {
      if (k == key) {
        return &v;
      }
    }
    return nullptr;
  }

  static std::string trim(const std::string & s)
  {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
      return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::vector<std::pair<std::string, std::string>> fields_;
  mutable std::set<std::string> used_;
};

/// Shortest round-trip text for a double, used in config files and headers.
inline std::string format_config_number(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace tjf

#endif  // TJF__CONFIG_HPP_
