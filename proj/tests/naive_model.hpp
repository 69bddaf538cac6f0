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

#ifndef TJF__TESTS__NAIVE_MODEL_HPP_
#define TJF__TESTS__NAIVE_MODEL_HPP_

#include "tjf/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace tjf::test
{

/// Row-major double matrix used by loop-based reference computations.
struct Mat
{
  std::size_t r{0}, c{0};
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : r(rows), c(cols), v(rows * cols, 0.0) {}
  double & operator()(std::size_t i, std::size_t j) { return v[i * c + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * c + j]; }
};

template <typename Store>
Mat param_mat(const Store & s, const std::string & name)
{
  const auto & t = s.get(name).value;
  Mat m(t.rank() == 1 ? 1 : t.rows(), t.cols());
  for (std::size_t i = 0; i < t.size(); ++i) m.v[i] = static_cast<double>(t.data[i]);
  return m;
}

template <typename Store>
Mat naive_linear(const Store & s, const std::string & name, const Mat & x)
{
  const Mat w = param_mat(s, name + ".weight");
  const Mat b = param_mat(s, name + ".bias");
  Mat y(x.r, w.c);
  for (std::size_t i = 0; i < x.r; ++i) {
    for (std::size_t j = 0; j < w.c; ++j) {
      double acc = b.v[j];
      for (std::size_t k = 0; k < x.c; ++k) acc += x(i, k) * w(k, j);
      y(i, j) = acc;
    }
  }
  return y;
}

template <typename Store>
Mat naive_layer_norm(const Store & s, const std::string & name, const Mat & x)
{
  const Mat g = param_mat(s, name + ".gamma");
  const Mat b = param_mat(s, name + ".beta");
  Mat y(x.r, x.c);
  for (std::size_t i = 0; i < x.r; ++i) {
    double mean = 0, var = 0;
    for (std::size_t j = 0; j < x.c; ++j) mean += x(i, j);
    mean /= static_cast<double>(x.c);
    for (std::size_t j = 0; j < x.c; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(x.c);
    for (std::size_t j = 0; j < x.c; ++j) {
      y(i, j) = (x(i, j) - mean) / std::sqrt(var + 1e-5) * g.v[j] + b.v[j];
    }
  }
  return y;
}

template <typename Store>
Mat naive_mha(
  const Store & s, const std::string & name, const Mat & xq, const Mat & xkv,
  const std::vector<std::uint8_t> & allowed, std::size_t heads)
{
  const Mat q = naive_linear(s, name + ".q", xq);
  const Mat k = naive_linear(s, name + ".k", xkv);
  const Mat v = naive_linear(s, name + ".v", xkv);
  const std::size_t d = q.c, dh = d / heads;
  Mat cat(xq.r, d);
  std::vector<std::uint8_t> any(xq.r, 0);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < xq.r; ++i) {
      std::vector<double> logit(xkv.r, -std::numeric_limits<double>::infinity());
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < xkv.r; ++j) {
        if (!allowed[i * xkv.r + j]) continue;
        double dot = 0;
        for (std::size_t c = 0; c < dh; ++c) dot += q(i, h * dh + c) * k(j, h * dh + c);
        logit[j] = dot / std::sqrt(static_cast<double>(dh));
        mx = std::max(mx, logit[j]);
        any[i] = 1;
      }
      if (!any[i]) continue;
      double den = 0;
      for (std::size_t j = 0; j < xkv.r; ++j) den += allowed[i * xkv.r + j] ? std::exp(logit[j] - mx) : 0.0;
      for (std::size_t j = 0; j < xkv.r; ++j) {
        if (!allowed[i * xkv.r + j]) continue;
        const double a = std::exp(logit[j] - mx) / den;
        for (std::size_t c = 0; c < dh; ++c) cat(i, h * dh + c) += a * v(j, h * dh + c);
      }
    }
  }
  Mat o = naive_linear(s, name + ".o", cat);
  for (std::size_t i = 0; i < o.r; ++i) {
    if (!any[i]) std::fill_n(o.v.begin() + i * o.c, o.c, 0.0);
  }
  return o;
}

inline Mat add(const Mat & a, const Mat & b)
{
  Mat y = a;
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += b.v[i];
  return y;
}

template <typename Store>
Mat naive_block(
  const Store & s, const std::string & name, const Mat & x, const Mat & kv,
  const std::vector<std::uint8_t> & allowed, std::size_t heads)
{
  const Mat h = naive_layer_norm(s, name + ".ln1", add(x, naive_mha(s, name + ".attn", x, kv, allowed, heads)));
  Mat f = naive_linear(s, name + ".ffn.fc1", h);
  for (double & e : f.v) e = std::max(e, 0.0);
  f = naive_linear(s, name + ".ffn.fc2", f);
  return naive_layer_norm(s, name + ".ln2", add(h, f));
}

}  // namespace tjf::test

#endif  // TJF__TESTS__NAIVE_MODEL_HPP_
