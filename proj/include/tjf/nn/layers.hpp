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

#ifndef TJF__NN__LAYERS_HPP_
#define TJF__NN__LAYERS_HPP_

#include "tjf/error.hpp"
#include "tjf/nn/tape.hpp"
#include "tjf/nn/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tjf::nn
{

struct AttentionConfig
{
  std::size_t d_model{128};
  std::size_t n_heads{4};

  void validate() const
  {
    if (n_heads == 0 || d_model % n_heads != 0) {
      throw Error(
        ErrorCode::InvalidConfig, "d_model " + std::to_string(d_model) +
                                    " not divisible by n_heads " + std::to_string(n_heads));
    }
  }
};

// Parameter registration. Weights and biases use uniform(-s, s), s = sqrt(1 / d_in).

template <typename T>
void add_linear(
  BasicParameterStore<T> & store, const std::string & name, std::size_t d_in, std::size_t d_out,
  std::uint64_t seed)
{
  const double s = std::sqrt(1.0 / static_cast<double>(d_in));
  store.add_uniform(name + ".weight", {d_in, d_out}, s, seed);
  store.add_uniform(name + ".bias", {d_out}, s, seed);
}

template <typename T>
void add_layer_norm(BasicParameterStore<T> & store, const std::string & name, std::size_t d)
{
  store.add_constant(name + ".gamma", {d}, T(1));
  store.add_constant(name + ".beta", {d}, T(0));
}

template <typename T>
void add_attention(
  BasicParameterStore<T> & store, const std::string & name, std::size_t d, std::uint64_t seed)
{
  add_linear(store, name + ".q", d, d, seed);
  add_linear(store, name + ".k", d, d, seed);
  add_linear(store, name + ".v", d, d, seed);
  add_linear(store, name + ".o", d, d, seed);
}

template <typename T>
void add_feed_forward(
  BasicParameterStore<T> & store, const std::string & name, std::size_t d, std::size_t hidden,
  std::uint64_t seed)
{
  add_linear(store, name + ".fc1", d, hidden, seed);
  add_linear(store, name + ".fc2", hidden, d, seed);
}

/// Attention sublayer + feed-forward sublayer, each residual and post-normalized.
template <typename T>
void add_transformer_block(
  BasicParameterStore<T> & store, const std::string & name, std::size_t d, std::uint64_t seed)
{
  add_attention(store, name + ".attn", d, seed);
  add_layer_norm(store, name + ".ln1", d);
  add_feed_forward(store, name + ".ffn", d, 2 * d, seed);
  add_layer_norm(store, name + ".ln2", d);
}

// Application.

template <typename T>
Var linear(BasicTape<T> & tape, BasicParameterStore<T> & store, const std::string & name, Var x)
{
  return tape.linear(
    x, tape.parameter(store, name + ".weight"), tape.parameter(store, name + ".bias"));
}

template <typename T>
Var layer_norm(BasicTape<T> & tape, BasicParameterStore<T> & store, const std::string & name, Var x)
{
  return tape.layer_norm(
    x, tape.parameter(store, name + ".gamma"), tape.parameter(store, name + ".beta"));
}

/// Key mask broadcast to every query: allowed[i][j] = key_mask[j].
inline std::vector<std::uint8_t> key_padding_mask(
  std::size_t n_queries, const std::vector<std::uint8_t> & key_mask)
{
  std::vector<std::uint8_t> allowed(n_queries * key_mask.size());
  for (std::size_t i = 0; i < n_queries; ++i) {
    std::copy(key_mask.begin(), key_mask.end(), allowed.begin() + i * key_mask.size());
  }
  return allowed;
}

/**
 * @brief Projected multi-head attention.
 *
 * Query rows whose mask row allows no key output exactly zero (the output
 * projection bias is not added for them).
 */
template <typename T>
Var multi_head_attention(
  BasicTape<T> & tape, BasicParameterStore<T> & store, const std::string & name, Var q_tokens,
  Var kv_tokens, const std::vector<std::uint8_t> & allowed, const AttentionConfig & cfg)
{
  cfg.validate();
  if (tape.value(q_tokens).cols() != cfg.d_model || tape.value(kv_tokens).cols() != cfg.d_model) {
    throw Error(ErrorCode::ShapeMismatch, name + ": token width != d_model");
  }
  const std::size_t nq = tape.value(q_tokens).rows();
  const std::size_t nk = tape.value(kv_tokens).rows();
  Var q = linear(tape, store, name + ".q", q_tokens);
  Var k = linear(tape, store, name + ".k", kv_tokens);
  Var v = linear(tape, store, name + ".v", kv_tokens);
  Var o = linear(tape, store, name + ".o", tape.attention(q, k, v, allowed, cfg.n_heads));
  std::vector<std::uint8_t> has_key(nq, 0);
  bool any_empty = false;
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < nk && !has_key[i]; ++j) {
      has_key[i] = allowed[i * nk + j];
    }
    any_empty = any_empty || !has_key[i];
  }
  return any_empty ? tape.mask_rows(o, std::move(has_key)) : o;
}

template <typename T>
Var feed_forward(BasicTape<T> & tape, BasicParameterStore<T> & store, const std::string & name, Var x)
{
  return linear(tape, store, name + ".fc2", tape.relu(linear(tape, store, name + ".fc1", x)));
}

/// x <- LN(x + MHA(x, kv)); x <- LN(x + FFN(x)).
template <typename T>
Var transformer_block(
  BasicTape<T> & tape, BasicParameterStore<T> & store, const std::string & name, Var x, Var kv,
  const std::vector<std::uint8_t> & allowed, const AttentionConfig & cfg)
{
  Var a = multi_head_attention(tape, store, name + ".attn", x, kv, allowed, cfg);
  Var h = layer_norm(tape, store, name + ".ln1", tape.add(x, a));
  Var f = feed_forward(tape, store, name + ".ffn", h);
  return layer_norm(tape, store, name + ".ln2", tape.add(h, f));
}

}  // namespace tjf::nn

#endif  // TJF__NN__LAYERS_HPP_
