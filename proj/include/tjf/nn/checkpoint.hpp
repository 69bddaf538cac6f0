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

#ifndef TJF__NN__CHECKPOINT_HPP_
#define TJF__NN__CHECKPOINT_HPP_

#include "tjf/error.hpp"
#include "tjf/nn/tensor.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace tjf::nn
{

/*
 * Checkpoint layout (all integers uint32 little-endian):
 *   "TJF1"
 *   header_length, header bytes (key=value lines)
 *   repeated until EOF:
 *     name_length, name bytes, rank, shape[rank], float32 LE values
 */

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

struct Checkpoint
{
  HeaderFields header;
  ParameterStore store;
};

namespace detail
{
inline void put_u32(std::string & out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
}

class Reader
{
public:
  explicit Reader(const std::string & bytes) : bytes_(bytes) {}

  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  std::uint32_t u32(const char * what)
  {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string take(std::size_t n, const char * what)
  {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

private:
  void need(std::size_t n, const char * what) const
  {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::CorruptCheckpoint, std::string("truncated ") + what);
    }
  }

  const std::string & bytes_;
  std::size_t pos_{0};
};
}  // namespace detail

inline std::string serialize_checkpoint(const ParameterStore & store, const HeaderFields & header)
{
  std::string out = "TJF1";
  std::string text;
  for (const auto & [k, v] : header) {
    text += k + "=" + v + "\n";
  }
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const auto & [name, p] : store.params()) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_u32(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape) {
      detail::put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float f : p.value.data) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, &f, sizeof bits);
      detail::put_u32(out, bits);
    }
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string & bytes)
{
  detail::Reader r(bytes);
  if (bytes.size() < 4 || bytes.compare(0, 4, "TJF1") != 0) {
    throw Error(ErrorCode::CorruptCheckpoint, "bad magic");
  }
  r.take(4, "magic");
  Checkpoint ck;
  const std::string text = r.take(r.u32("header length"), "header");
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::CorruptCheckpoint, "header line without '='");
    }
    ck.header.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  while (!r.at_end()) {
    const std::string name = r.take(r.u32("name length"), "name");
    const std::uint32_t rank = r.u32("rank");
    if (rank > 8) {
      throw Error(ErrorCode::CorruptCheckpoint, "implausible rank for " + name);
    }
    Shape shape;
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape.push_back(r.u32("shape"));
      count *= shape.back();
      if (count > bytes.size()) {
        throw Error(ErrorCode::CorruptCheckpoint, "truncated values of " + name);
      }
    }
    if (count * 4 > bytes.size()) {
      throw Error(ErrorCode::CorruptCheckpoint, "truncated values of " + name);
    }
    Tensor t(shape);
    for (float & f : t.data) {
      const std::uint32_t bits = r.u32("values");
      std::memcpy(&f, &bits, sizeof f);
    }
    if (ck.store.contains(name)) {
      throw Error(ErrorCode::CorruptCheckpoint, "duplicate parameter " + name);
    }
    ck.store.add(name, std::move(t));
  }
  return ck;
}

inline void save_checkpoint_file(
  const ParameterStore & store, const HeaderFields & header, const std::string & path)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  const std::string bytes = serialize_checkpoint(store, header);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw Error(ErrorCode::IoError, "write failed for " + path);
  }
}

inline Checkpoint load_checkpoint_file(const std::string & path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw Error(ErrorCode::IoError, "cannot read " + path);
  }
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace tjf::nn

#endif  // TJF__NN__CHECKPOINT_HPP_
