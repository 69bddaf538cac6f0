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

#ifndef TJF__NN__TAPE_HPP_
#define TJF__NN__TAPE_HPP_

#include "tjf/error.hpp"
#include "tjf/nn/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tjf::nn
{

/// Handle to a value recorded on a tape.
struct Var
{
  std::size_t id{std::numeric_limits<std::size_t>::max()};
};

/**
 * @brief Reverse-mode autodiff tape over dense row-major tensors.
 *
 * Every op appends a node holding its forward value and a closure that
 * pushes the node's gradient to its inputs. `backward` replays the closures
 * in reverse order. A tape is single-use and bound to one thread.
 */
template <typename T>
class BasicTape
{
public:
  using TensorT = BasicTensor<T>;
  using StoreT = BasicParameterStore<T>;
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;

  BasicTape() = default;
  BasicTape(const BasicTape &) = delete;
  BasicTape & operator=(const BasicTape &) = delete;

  Var constant(TensorT value) { return push(std::move(value), false); }

  /// Records a parameter leaf; repeated lookups of the same name share one node.
  Var parameter(StoreT & store, const std::string & name)
  {
    Parameter<T> & p = store.get(name);
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) {
      return Var{it->second};
    }
    if (std::find(stores_.begin(), stores_.end(), &store) == stores_.end()) {
      stores_.push_back(&store);
    }
    Node n;
    n.param = &p;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    const std::size_t id = nodes_.size() - 1;
    param_nodes_.emplace(&p, id);
    return Var{id};
  }

  /// Read-only parameter leaf: never receives gradient.
  Var frozen(const StoreT & store, const std::string & name)
  {
    return constant(store.get(name).value);
  }

  const TensorT & value(Var v) const
  {
    const Node & n = nodes_.at(v.id);
    return n.param ? n.param->value : n.value;
  }

  /// Gradient accumulated at a node by the last backward (empty if unreached).
  const TensorT & grad(Var v) const { return nodes_.at(v.id).grad; }

  std::size_t num_nodes() const noexcept { return nodes_.size(); }

  // ---------------------------------------------------------------- ops

  Var reshape(Var x, Shape shape)
  {
    const TensorT & xv = value(x);
    if (shape_size(shape) != xv.size()) {
      throw Error(
        ErrorCode::ShapeMismatch,
        "reshape " + shape_string(xv.shape) + " -> " + shape_string(shape));
    }
    TensorT out(std::move(shape), xv.data);
    return record(std::move(out), {x}, [this, x](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      add_into(grad_ref(x), nodes_[self].grad.data);
    });
  }

  /// x[..., k] * w[k, n] -> [..., n].
  Var matmul(Var a, Var b)
  {
    const TensorT & av = value(a);
    const TensorT & bv = value(b);
    if (bv.rank() != 2 || av.cols() != bv.shape[0]) {
      throw Error(
        ErrorCode::ShapeMismatch, "matmul " + shape_string(av.shape) + " x " + shape_string(bv.shape));
    }
    const std::size_t m = av.rows();
    const std::size_t k = av.cols();
    const std::size_t n = bv.shape[1];
    Shape shape = av.shape;
    shape.back() = n;
    TensorT out(shape);
    mat(out, m, n).noalias() = cmat(av, m, k) * cmat(bv, k, n);
    return record(std::move(out), {a, b}, [this, a, b, m, k, n](std::size_t self) {
      auto dc = cmat(nodes_[self].grad, m, n);
      if (needs(a)) {
        mat(grad_ref(a), m, k).noalias() += dc * cmat(value(b), k, n).transpose();
      }
      if (needs(b)) {
        mat(grad_ref(b), k, n).noalias() += cmat(value(a), m, k).transpose() * dc;
      }
    });
  }

  /// Affine map x * w + b over the last axis.
  Var linear(Var x, Var w, Var b)
  {
    const TensorT & wv = value(w);
    const TensorT & bv = value(b);
    if (wv.rank() != 2 || bv.size() != wv.shape[1]) {
      throw Error(
        ErrorCode::ShapeMismatch,
        "linear weight " + shape_string(wv.shape) + " bias " + shape_string(bv.shape));
    }
    return add_row(matmul(x, w), b);
  }

  Var add(Var a, Var b) { return binary(a, b, T(1)); }
  Var sub(Var a, Var b) { return binary(a, b, T(-1)); }

  /// a[r, c] + b[c] broadcast over rows.
  Var add_row(Var a, Var b)
  {
    const TensorT & av = value(a);
    const TensorT & bv = value(b);
    if (bv.size() != av.cols()) {
      throw Error(
        ErrorCode::ShapeMismatch, "add_row " + shape_string(av.shape) + " + " + shape_string(bv.shape));
    }
    TensorT out = av;
    const std::size_t r = av.rows();
    const std::size_t c = av.cols();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        out.data[i * c + j] += bv.data[j];
      }
    }
    return record(std::move(out), {a, b}, [this, a, b, r, c](std::size_t self) {
      const TensorT & g = nodes_[self].grad;
      if (needs(a)) {
        add_into(grad_ref(a), g.data);
      }
      if (needs(b)) {
        TensorT & gb = grad_ref(b);
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            gb.data[j] += g.data[i * c + j];
          }
        }
      }
    });
  }

  /// a[G*n, c] + b[n, c] with b tiled G times along the rows.
  Var add_tiled(Var a, Var b)
  {
    const TensorT & av = value(a);
    const TensorT & bv = value(b);
    const std::size_t c = av.cols();
    const std::size_t n = bv.rows();
    if (bv.cols() != c || n == 0 || av.rows() % n != 0) {
      throw Error(
        ErrorCode::ShapeMismatch,
        "add_tiled " + shape_string(av.shape) + " + " + shape_string(bv.shape));
    }
    TensorT out = av;
    const std::size_t block = n * c;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.data[i] += bv.data[i % block];
    }
    return record(std::move(out), {a, b}, [this, a, b, block](std::size_t self) {
      const TensorT & g = nodes_[self].grad;
      if (needs(a)) {
        add_into(grad_ref(a), g.data);
      }
      if (needs(b)) {
        TensorT & gb = grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb.data[i % block] += g.data[i];
        }
      }
    });
  }

  Var scale(Var x, T factor)
  {
    TensorT out = value(x);
    for (T & v : out.data) {
      v *= factor;
    }
    return record(std::move(out), {x}, [this, x, factor](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      TensorT & gx = grad_ref(x);
      const TensorT & g = nodes_[self].grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx.data[i] += factor * g.data[i];
      }
    });
  }

  Var relu(Var x)
  {
    TensorT out = value(x);
    for (T & v : out.data) {
      v = v > T(0) ? v : T(0);
    }
    return record(std::move(out), {x}, [this, x](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      TensorT & gx = grad_ref(x);
      const TensorT & xv = value(x);
      const TensorT & g = nodes_[self].grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xv.data[i] > T(0)) {
          gx.data[i] += g.data[i];
        }
      }
    });
  }

  Var square(Var x)
  {
    TensorT out = value(x);
    for (T & v : out.data) {
      v = v * v;
    }
    return record(std::move(out), {x}, [this, x](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      TensorT & gx = grad_ref(x);
      const TensorT & xv = value(x);
      const TensorT & g = nodes_[self].grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx.data[i] += T(2) * xv.data[i] * g.data[i];
      }
    });
  }

  /// Zeroes rows whose mask entry is 0.
  Var mask_rows(Var x, std::vector<std::uint8_t> row_mask)
  {
    TensorT out = value(x);
    const std::size_t c = out.cols();
    if (row_mask.size() != out.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "mask_rows: mask length != rows");
    }
    for (std::size_t r = 0; r < row_mask.size(); ++r) {
      if (!row_mask[r]) {
        std::fill_n(out.data.begin() + r * c, c, T(0));
      }
    }
    return record(std::move(out), {x}, [this, x, c, m = std::move(row_mask)](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      TensorT & gx = grad_ref(x);
      const TensorT & g = nodes_[self].grad;
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (m[r]) {
          for (std::size_t j = 0; j < c; ++j) {
            gx.data[r * c + j] += g.data[r * c + j];
          }
        }
      }
    });
  }

  /// Numerically stable softmax over the last axis.
  Var softmax(Var x)
  {
    TensorT out = value(x);
    const std::size_t r = out.rows();
    const std::size_t c = out.cols();
    for (std::size_t i = 0; i < r; ++i) {
      T * row = out.data.data() + i * c;
      const T mx = *std::max_element(row, row + c);
      T sum = 0;
      for (std::size_t j = 0; j < c; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      for (std::size_t j = 0; j < c; ++j) {
        row[j] /= sum;
      }
    }
    return record(std::move(out), {x}, [this, x, r, c](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      const TensorT & y = nodes_[self].value;
      const TensorT & g = nodes_[self].grad;
      TensorT & gx = grad_ref(x);
      for (std::size_t i = 0; i < r; ++i) {
        T dot = 0;
        for (std::size_t j = 0; j < c; ++j) {
          dot += g.data[i * c + j] * y.data[i * c + j];
        }
        for (std::size_t j = 0; j < c; ++j) {
          gx.data[i * c + j] += y.data[i * c + j] * (g.data[i * c + j] - dot);
        }
      }
    });
  }

  Var log_softmax(Var x)
  {
    TensorT out = value(x);
    const std::size_t r = out.rows();
    const std::size_t c = out.cols();
    for (std::size_t i = 0; i < r; ++i) {
      T * row = out.data.data() + i * c;
      const T mx = *std::max_element(row, row + c);
      T sum = 0;
      for (std::size_t j = 0; j < c; ++j) {
        sum += std::exp(row[j] - mx);
      }
      const T lse = mx + std::log(sum);
      for (std::size_t j = 0; j < c; ++j) {
        row[j] -= lse;
      }
    }
    return record(std::move(out), {x}, [this, x, r, c](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      const TensorT & y = nodes_[self].value;
      const TensorT & g = nodes_[self].grad;
      TensorT & gx = grad_ref(x);
      for (std::size_t i = 0; i < r; ++i) {
        T gsum = 0;
        for (std::size_t j = 0; j < c; ++j) {
          gsum += g.data[i * c + j];
        }
        for (std::size_t j = 0; j < c; ++j) {
          gx.data[i * c + j] += g.data[i * c + j] - std::exp(y.data[i * c + j]) * gsum;
        }
      }
    });
  }

  /// Per-row normalization over the last axis followed by gamma/beta affine.
  Var layer_norm(Var x, Var gamma, Var beta, T eps = T(1e-5))
  {
    const TensorT & xv = value(x);
    const std::size_t r = xv.rows();
    const std::size_t c = xv.cols();
    if (value(gamma).size() != c || value(beta).size() != c) {
      throw Error(ErrorCode::ShapeMismatch, "layer_norm gamma/beta size != " + std::to_string(c));
    }
    auto xhat = std::make_shared<TensorT>(xv.shape);
    auto inv_std = std::make_shared<std::vector<T>>(r);
    TensorT out(xv.shape);
    const TensorT & gv = value(gamma);
    const TensorT & bv = value(beta);
    for (std::size_t i = 0; i < r; ++i) {
      const T * row = xv.data.data() + i * c;
      T mean = 0;
      for (std::size_t j = 0; j < c; ++j) {
        mean += row[j];
      }
      mean /= static_cast<T>(c);
      T var = 0;
      for (std::size_t j = 0; j < c; ++j) {
        var += (row[j] - mean) * (row[j] - mean);
      }
      var /= static_cast<T>(c);
      const T is = T(1) / std::sqrt(var + eps);
      (*inv_std)[i] = is;
      for (std::size_t j = 0; j < c; ++j) {
        const T h = (row[j] - mean) * is;
        xhat->data[i * c + j] = h;
        out.data[i * c + j] = h * gv.data[j] + bv.data[j];
      }
    }
    return record(
      std::move(out), {x, gamma, beta},
      [this, x, gamma, beta, r, c, xhat, inv_std](std::size_t self) {
        const TensorT & g = nodes_[self].grad;
        if (needs(gamma) || needs(beta)) {
          const bool ng = needs(gamma);
          const bool nb = needs(beta);
          TensorT * gg = ng ? &grad_ref(gamma) : nullptr;
          TensorT * gb = nb ? &grad_ref(beta) : nullptr;
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
              if (ng) {
                gg->data[j] += g.data[i * c + j] * xhat->data[i * c + j];
              }
              if (nb) {
                gb->data[j] += g.data[i * c + j];
              }
            }
          }
        }
        if (!needs(x)) {
          return;
        }
        TensorT & gx = grad_ref(x);
        const TensorT & gv = value(gamma);
        const T inv_c = T(1) / static_cast<T>(c);
        for (std::size_t i = 0; i < r; ++i) {
          T mean_d = 0;
          T mean_dh = 0;
          for (std::size_t j = 0; j < c; ++j) {
            const T d = g.data[i * c + j] * gv.data[j];
            mean_d += d;
            mean_dh += d * xhat->data[i * c + j];
          }
          mean_d *= inv_c;
          mean_dh *= inv_c;
          for (std::size_t j = 0; j < c; ++j) {
            const T d = g.data[i * c + j] * gv.data[j];
            gx.data[i * c + j] +=
              (*inv_std)[i] * (d - mean_d - xhat->data[i * c + j] * mean_dh);
          }
        }
      });
  }

  /**
   * @brief Multi-head scaled dot-product attention core (no projections).
   *
   * q: [nq, d], k: [nk, d], v: [nk, dv]; `allowed` is an nq x nk 0/1 mask.
   * Disallowed logits are treated as -inf. A query row with no allowed key
   * produces a zero output row.
   */
  Var attention(Var q, Var k, Var v, const std::vector<std::uint8_t> & allowed, std::size_t n_heads)
  {
    const TensorT & qv = value(q);
    const TensorT & kv = value(k);
    const TensorT & vv = value(v);
    const std::size_t nq = qv.rows();
    const std::size_t nk = kv.rows();
    const std::size_t d = qv.cols();
    const std::size_t dv = vv.cols();
    if (
      n_heads == 0 || kv.cols() != d || vv.rows() != nk || d % n_heads != 0 ||
      dv % n_heads != 0 || allowed.size() != nq * nk) {
      throw Error(
        ErrorCode::ShapeMismatch, "attention q " + shape_string(qv.shape) + " k " +
                                    shape_string(kv.shape) + " v " + shape_string(vv.shape));
    }
    const std::size_t dh = d / n_heads;
    const std::size_t dvh = dv / n_heads;
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    auto probs = std::make_shared<std::vector<Mat>>(n_heads);
    TensorT out(Shape{nq, dv});
    auto qm = cmat(qv, nq, d);
    auto km = cmat(kv, nk, d);
    auto vm = cmat(vv, nk, dv);
    auto om = mat(out, nq, dv);
    for (std::size_t h = 0; h < n_heads; ++h) {
      Mat s = (qm.middleCols(h * dh, dh) * km.middleCols(h * dh, dh).transpose()) * scale;
      for (std::size_t i = 0; i < nq; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < nk; ++j) {
          if (allowed[i * nk + j]) {
            mx = std::max(mx, s(i, j));
          }
        }
        T sum = 0;
        for (std::size_t j = 0; j < nk; ++j) {
          if (allowed[i * nk + j]) {
            s(i, j) = std::exp(s(i, j) - mx);
            sum += s(i, j);
          } else {
            s(i, j) = 0;
          }
        }
        if (sum > T(0)) {
          s.row(i) /= sum;
        }
      }
      om.middleCols(h * dvh, dvh).noalias() = s * vm.middleCols(h * dvh, dvh);
      (*probs)[h] = std::move(s);
    }
    return record(
      std::move(out), {q, k, v},
      [this, q, k, v, nq, nk, d, dv, dh, dvh, n_heads, scale, probs](std::size_t self) {
        auto go = cmat(nodes_[self].grad, nq, dv);
        auto qm = cmat(value(q), nq, d);
        auto km = cmat(value(k), nk, d);
        auto vm = cmat(value(v), nk, dv);
        const bool nq_ = needs(q);
        const bool nk_ = needs(k);
        const bool nv_ = needs(v);
        for (std::size_t h = 0; h < n_heads; ++h) {
          const Mat & p = (*probs)[h];
          auto goh = go.middleCols(h * dvh, dvh);
          if (nv_) {
            mat(grad_ref(v), nk, dv).middleCols(h * dvh, dvh).noalias() += p.transpose() * goh;
          }
          if (!nq_ && !nk_) {
            continue;
          }
          Mat dp = goh * vm.middleCols(h * dvh, dvh).transpose();
          Mat ds(nq, nk);
          for (std::size_t i = 0; i < nq; ++i) {
            const T dot = (dp.row(i).array() * p.row(i).array()).sum();
            ds.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
          }
          if (nq_) {
            mat(grad_ref(q), nq, d).middleCols(h * dh, dh).noalias() +=
              (ds * km.middleCols(h * dh, dh)) * scale;
          }
          if (nk_) {
            mat(grad_ref(k), nk, d).middleCols(h * dh, dh).noalias() +=
              (ds.transpose() * qm.middleCols(h * dh, dh)) * scale;
          }
        }
      });
  }

  /// Stacks 2-D views along the row axis; all inputs must share cols().
  Var concat_rows(const std::vector<Var> & parts)
  {
    if (parts.empty()) {
      throw Error(ErrorCode::ShapeMismatch, "concat_rows of nothing");
    }
    const std::size_t c = value(parts[0]).cols();
    std::size_t total = 0;
    std::vector<std::size_t> offsets;
    for (Var p : parts) {
      if (value(p).cols() != c) {
        throw Error(ErrorCode::ShapeMismatch, "concat_rows: column mismatch");
      }
      offsets.push_back(total);
      total += value(p).rows();
    }
    TensorT out(Shape{total, c});
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const TensorT & pv = value(parts[i]);
      std::copy(pv.data.begin(), pv.data.end(), out.data.begin() + offsets[i] * c);
    }
    return record(std::move(out), parts, [this, parts, offsets, c](std::size_t self) {
      const TensorT & g = nodes_[self].grad;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!needs(parts[i])) {
          continue;
        }
        TensorT & gp = grad_ref(parts[i]);
        for (std::size_t j = 0; j < gp.size(); ++j) {
          gp.data[j] += g.data[offsets[i] * c + j];
        }
      }
    });
  }

  /// Rows [begin, begin + count) of the 2-D view.
  Var slice_rows(Var x, std::size_t begin, std::size_t count)
  {
    const TensorT & xv = value(x);
    const std::size_t c = xv.cols();
    if (begin + count > xv.rows()) {
      throw Error(ErrorCode::ShapeMismatch, "slice_rows out of range");
    }
    TensorT out(Shape{count, c});
    std::copy_n(xv.data.begin() + begin * c, count * c, out.data.begin());
    return record(std::move(out), {x}, [this, x, begin, c](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      const TensorT & g = nodes_[self].grad;
      TensorT & gx = grad_ref(x);
      for (std::size_t j = 0; j < g.size(); ++j) {
        gx.data[begin * c + j] += g.data[j];
      }
    });
  }

  /**
   * @brief Column-wise max over each group of `group` consecutive rows.
   *
   * Rows with mask 0 are ignored; a group with no valid row yields zeros.
   */
  Var group_max(Var x, std::size_t group, const std::vector<std::uint8_t> & row_mask)
  {
    const TensorT & xv = value(x);
    const std::size_t c = xv.cols();
    const std::size_t r = xv.rows();
    if (group == 0 || r % group != 0 || row_mask.size() != r) {
      throw Error(ErrorCode::ShapeMismatch, "group_max: bad group/mask");
    }
    const std::size_t n_groups = r / group;
    TensorT out(Shape{n_groups, c});
    auto arg = std::make_shared<std::vector<std::size_t>>(
      n_groups * c, std::numeric_limits<std::size_t>::max());
    for (std::size_t g = 0; g < n_groups; ++g) {
      for (std::size_t j = 0; j < c; ++j) {
        std::size_t best = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = g * group; i < (g + 1) * group; ++i) {
          if (row_mask[i] && (best == std::numeric_limits<std::size_t>::max() ||
                              xv.data[i * c + j] > xv.data[best * c + j])) {
            best = i;
          }
        }
        if (best != std::numeric_limits<std::size_t>::max()) {
          out.data[g * c + j] = xv.data[best * c + j];
          (*arg)[g * c + j] = best;
        }
      }
    }
    return record(std::move(out), {x}, [this, x, c, arg](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      const TensorT & g = nodes_[self].grad;
      TensorT & gx = grad_ref(x);
      for (std::size_t o = 0; o < arg->size(); ++o) {
        const std::size_t src = (*arg)[o];
        if (src != std::numeric_limits<std::size_t>::max()) {
          gx.data[src * c + o % c] += g.data[o];
        }
      }
    });
  }

  /// Scalar sum of all elements.
  Var sum(Var x)
  {
    return weighted_sum(x, std::vector<T>(value(x).size(), T(1)));
  }

  /// Scalar sum_i x_i * w_i with constant weights.
  Var weighted_sum(Var x, std::vector<T> weights)
  {
    const TensorT & xv = value(x);
    if (weights.size() != xv.size()) {
      throw Error(ErrorCode::ShapeMismatch, "weighted_sum: weight length != size");
    }
    T s = 0;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      s += xv.data[i] * weights[i];
    }
    return record(TensorT::scalar(s), {x}, [this, x, w = std::move(weights)](std::size_t self) {
      if (!needs(x)) {
        return;
      }
      const T g = nodes_[self].grad.data[0];
      TensorT & gx = grad_ref(x);
      for (std::size_t i = 0; i < w.size(); ++i) {
        gx.data[i] += g * w[i];
      }
    });
  }

  /// Scalar element at flat index.
  Var pick(Var x, std::size_t index)
  {
    std::vector<T> w(value(x).size(), T(0));
    if (index >= w.size()) {
      throw Error(ErrorCode::ShapeMismatch, "pick index out of range");
    }
    w[index] = T(1);
    return weighted_sum(x, std::move(w));
  }

  /**
   * @brief Backpropagates a scalar loss.
   *
   * Gradients of every parameter store touched by this tape are reset first,
   * so unreachable parameters end with zero gradient.
   */
  void backward(Var loss)
  {
    const TensorT & lv = value(loss);
    if (lv.size() != 1) {
      throw Error(ErrorCode::NotScalarLoss, "loss has shape " + shape_string(lv.shape));
    }
    for (StoreT * s : stores_) {
      s->zero_grad();
    }
    for (Node & n : nodes_) {
      n.grad = TensorT();
    }
    grad_ref(loss).data[0] = T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node & n = nodes_[i];
      if (n.grad.data.empty()) {
        continue;
      }
      if (n.backward) {
        n.backward(i);
      }
      if (n.param) {
        add_into(n.param->grad, n.grad.data);
      }
    }
    for (StoreT * s : stores_) {
      s->mark_gradients_ready();
    }
  }

private:
  struct Node
  {
    TensorT value;
    TensorT grad;
    Parameter<T> * param{nullptr};
    std::function<void(std::size_t)> backward;
    bool requires_grad{false};
  };

  Var push(TensorT value, bool requires_grad)
  {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Var record(
    TensorT value, const std::vector<Var> & inputs, std::function<void(std::size_t)> backward)
  {
    bool rg = false;
    for (Var v : inputs) {
      rg = rg || nodes_[v.id].requires_grad;
    }
    Var out = push(std::move(value), rg);
    if (rg) {
      nodes_[out.id].backward = std::move(backward);
    }
    return out;
  }

  Var binary(Var a, Var b, T sign)
  {
    const TensorT & av = value(a);
    const TensorT & bv = value(b);
    if (av.size() != bv.size()) {
      throw Error(
        ErrorCode::ShapeMismatch, "elementwise " + shape_string(av.shape) + " vs " +
                                    shape_string(bv.shape));
    }
    TensorT out = av;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.data[i] += sign * bv.data[i];
    }
    return record(std::move(out), {a, b}, [this, a, b, sign](std::size_t self) {
      const TensorT & g = nodes_[self].grad;
      if (needs(a)) {
        add_into(grad_ref(a), g.data);
      }
      if (needs(b)) {
        TensorT & gb = grad_ref(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb.data[i] += sign * g.data[i];
        }
      }
    });
  }

  bool needs(Var v) const { return nodes_[v.id].requires_grad; }

  TensorT & grad_ref(Var v)
  {
    Node & n = nodes_[v.id];
    if (n.grad.data.empty()) {
      n.grad = TensorT(value(v).shape);
    }
    return n.grad;
  }

  static void add_into(TensorT & dst, const std::vector<T> & src)
  {
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst.data[i] += src[i];
    }
  }

  static MatMap mat(TensorT & t, std::size_t r, std::size_t c)
  {
    return MatMap(t.data.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  static ConstMatMap cmat(const TensorT & t, std::size_t r, std::size_t c)
  {
    return ConstMatMap(t.data.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T> *, std::size_t> param_nodes_;
  std::vector<StoreT *> stores_;
};

using Tape = BasicTape<float>;

}  // namespace tjf::nn

#endif  // TJF__NN__TAPE_HPP_
