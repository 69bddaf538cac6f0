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

#ifndef TJF__NN__TENSOR_HPP_
#define TJF__NN__TENSOR_HPP_

#include "tjf/error.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace tjf::nn
{

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape & shape) noexcept
{
  return std::accumulate(
    shape.begin(), shape.end(), std::size_t{1}, std::multiplies<std::size_t>());
}

inline std::string shape_string(const Shape & shape)
{
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += (i ? "," : "") + std::to_string(shape[i]);
  }
  return s + "]";
}

/**
 * @brief Dense row-major tensor.
 *
 * Most operations view a tensor as a matrix of `rows()` x `cols()`, where
 * `cols()` is the last axis and `rows()` the product of the leading axes.
 */
template <typename T>
struct BasicTensor
{
  Shape shape;
  std::vector<T> data;

  BasicTensor() = default;
  explicit BasicTensor(Shape s, T fill = T(0)) : shape(std::move(s)), data(shape_size(shape), fill)
  {
  }
  BasicTensor(Shape s, std::vector<T> values) : shape(std::move(s)), data(std::move(values))
  {
    if (data.size() != shape_size(shape)) {
      throw Error(
        ErrorCode::ShapeMismatch, "data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_string(shape));
    }
  }

  static BasicTensor scalar(T v) { return BasicTensor(Shape{1}, std::vector<T>{v}); }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t cols() const noexcept { return shape.empty() ? 1 : shape.back(); }
  std::size_t rows() const noexcept
  {
    const std::size_t c = cols();
    return c == 0 ? 0 : data.size() / c;
  }

  T & operator[](std::size_t i) { return data[i]; }
  const T & operator[](std::size_t i) const { return data[i]; }
  T & at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  const T & at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool all_finite() const noexcept
  {
    for (const T & v : data) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
    return true;
  }

  template <typename U>
  BasicTensor<U> cast() const
  {
    return BasicTensor<U>(shape, std::vector<U>(data.begin(), data.end()));
  }

  bool operator==(const BasicTensor &) const = default;
};

using Tensor = BasicTensor<float>;

/// SplitMix64; portable across standard libraries, unlike std distributions.
class SplitMix64
{
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept
  {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() noexcept
  {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::size_t index(std::size_t n) noexcept { return static_cast<std::size_t>(uniform() * n); }

private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(const std::string & s) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
struct Parameter
{
  BasicTensor<T> value;
  BasicTensor<T> grad;
  BasicTensor<T> adam_m;
  BasicTensor<T> adam_v;
};

struct AdamConfig
{
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
};

/**
 * @brief Named parameters with gradient and Adam moment slots.
 *
 * Iteration order is by name, which fixes the checkpoint record order and
 * the gradient application order.
 */
template <typename T>
class BasicParameterStore
{
public:
  using ParameterType = Parameter<T>;

  Parameter<T> & add(const std::string & name, BasicTensor<T> value)
  {
    if (params_.count(name)) {
      throw Error(ErrorCode::InvariantViolation, "duplicate parameter name " + name);
    }
    Parameter<T> p;
    p.grad = BasicTensor<T>(value.shape);
    p.adam_m = BasicTensor<T>(value.shape);
    p.adam_v = BasicTensor<T>(value.shape);
    p.value = std::move(value);
    return params_.emplace(name, std::move(p)).first->second;
  }

  /// Adds a parameter drawn from uniform(-scale, scale); the stream depends on (seed, name) only.
  Parameter<T> & add_uniform(const std::string & name, Shape shape, double scale, std::uint64_t seed)
  {
    SplitMix64 rng(seed ^ fnv1a(name));
    BasicTensor<T> v(std::move(shape));
    for (T & x : v.data) {
      x = static_cast<T>(rng.uniform(-scale, scale));
    }
    return add(name, std::move(v));
  }

  Parameter<T> & add_constant(const std::string & name, Shape shape, T fill)
  {
    return add(name, BasicTensor<T>(std::move(shape), fill));
  }

  bool contains(const std::string & name) const { return params_.count(name) != 0; }

  Parameter<T> & get(const std::string & name)
  {
    auto it = params_.find(name);
    if (it == params_.end()) {
      throw Error(ErrorCode::InvariantViolation, "unknown parameter " + name);
    }
    return it->second;
  }
  const Parameter<T> & get(const std::string & name) const
  {
    auto it = params_.find(name);
    if (it == params_.end()) {
      throw Error(ErrorCode::InvariantViolation, "unknown parameter " + name);
    }
    return it->second;
  }

  std::map<std::string, Parameter<T>> & params() noexcept { return params_; }
  const std::map<std::string, Parameter<T>> & params() const noexcept { return params_; }

  std::size_t size() const noexcept { return params_.size(); }

  std::size_t num_scalars() const noexcept
  {
    std::size_t n = 0;
    for (const auto & [name, p] : params_) {
      n += p.value.size();
    }
    return n;
  }

  void zero_grad()
  {
    for (auto & [name, p] : params_) {
      std::fill(p.grad.data.begin(), p.grad.data.end(), T(0));
    }
    has_gradients_ = false;
  }

  void mark_gradients_ready() noexcept { has_gradients_ = true; }
  bool has_gradients() const noexcept { return has_gradients_; }

  double grad_norm() const
  {
    double s = 0.0;
    for (const auto & [name, p] : params_) {
      for (T g : p.grad.data) {
        s += static_cast<double>(g) * static_cast<double>(g);
      }
    }
    return std::sqrt(s);
  }

  void scale_grad(double factor)
  {
    for (auto & [name, p] : params_) {
      for (T & g : p.grad.data) {
        g = static_cast<T>(g * factor);
      }
    }
  }

  /// Bias-corrected Adam update; consumes the populated gradients.
  void adam_step(const AdamConfig & cfg)
  {
    if (!has_gradients_) {
      throw Error(ErrorCode::MissingGradients, "adam_step called before backward");
    }
    ++step_;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
    for (auto & [name, p] : params_) {
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        const double m = cfg.beta1 * p.adam_m[i] + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * p.adam_v[i] + (1.0 - cfg.beta2) * g * g;
        p.adam_m[i] = static_cast<T>(m);
        p.adam_v[i] = static_cast<T>(v);
        const double update = cfg.lr * (m / c1) / (std::sqrt(v / c2) + cfg.eps);
        p.value[i] = static_cast<T>(p.value[i] - update);
      }
    }
    has_gradients_ = false;
  }

  std::int64_t step() const noexcept { return step_; }

private:
  std::map<std::string, Parameter<T>> params_;
  std::int64_t step_{0};
  bool has_gradients_{false};
};

using ParameterStore = BasicParameterStore<float>;

}  // namespace tjf::nn

#endif  // TJF__NN__TENSOR_HPP_
