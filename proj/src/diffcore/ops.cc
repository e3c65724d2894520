// diffcore/ops.cc

// Copyright 2026 The nbest-rescore Authors
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

#include "diffcore/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.h"
#include "diffcore/tape.h"

namespace rescore {
namespace diff {

namespace {

struct Dims {
  std::size_t r, c;
};

Dims View2d(const Shape &s) {
  switch (s.size()) {
    case 0: return {1, 1};
    case 1: return {1, s[0]};
    case 2: return {s[0], s[1]};
    default:
      Fail(ErrorKind::kDimension, "rank above 2: " + ShapeString(s));
  }
}

// Outputs of ops that nothing differentiates through are plain constants
// (leaves); only recorded outputs are interior nodes.
Tensor MakeResult(Shape shape, std::vector<double> values,
                  std::initializer_list<const Tensor *> inputs) {
  Tensor out = Tensor::FromValues(std::move(shape), std::move(values));
  bool needs = false;
  if (IsRecording()) {
    for (const Tensor *t : inputs) needs = needs || t->requires_grad();
  }
  out.set_requires_grad(needs);
  out.node()->is_leaf = !needs;
  return out;
}

void RecordIfNeeded(const char *op, std::vector<Tensor> inputs,
                    const Tensor &out, Tape::BackwardFn fn) {
  if (!out.requires_grad()) return;
  Tape::Active()->Record(op, std::move(inputs), out, std::move(fn));
}

// C[MxN] += A[MxK] . B[KxN], accumulating over k in order.
void GemmAcc(std::size_t m, std::size_t k, std::size_t n,
             const double *__restrict a, const double *__restrict b,
             double *__restrict c) {
  for (std::size_t i = 0; i < m; ++i) {
    double *__restrict ci = c + i * n;
    const double *ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double *__restrict bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

std::vector<double> TransposeValues(std::span<const double> v, std::size_t r,
                                    std::size_t c) {
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t[j * r + i] = v[i * c + j];
  return t;
}

enum class Binary { kAdd, kMul };

Tensor BroadcastBinary(const Tensor &a, const Tensor &b, Binary kind) {
  const char *name = kind == Binary::kAdd ? "add" : "mul";
  Dims da = View2d(a.shape()), db = View2d(b.shape());
  auto merge = [&](std::size_t x, std::size_t y) {
    if (x != y && x != 1 && y != 1)
      Fail(ErrorKind::kDimension,
           std::string(name) + ": cannot broadcast " + ShapeString(a.shape()) +
               " with " + ShapeString(b.shape()));
    return std::max(x, y);
  };
  Dims out{merge(da.r, db.r), merge(da.c, db.c)};
  Shape shape;
  std::size_t rank = std::max(a.rank(), b.rank());
  if (rank == 2) shape = {out.r, out.c};
  else if (rank == 1) shape = {out.c};

  auto va = a.values(), vb = b.values();
  std::vector<double> v(out.r * out.c);
  const bool same = da.r == db.r && da.c == db.c;
  if (same) {
    if (kind == Binary::kAdd)
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] + vb[i];
    else
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] * vb[i];
  } else {
    for (std::size_t i = 0; i < out.r; ++i) {
      std::size_t ra = (da.r == 1 ? 0 : i) * da.c;
      std::size_t rb = (db.r == 1 ? 0 : i) * db.c;
      for (std::size_t j = 0; j < out.c; ++j) {
        double x = va[ra + (da.c == 1 ? 0 : j)];
        double y = vb[rb + (db.c == 1 ? 0 : j)];
        v[i * out.c + j] = kind == Binary::kAdd ? x + y : x * y;
      }
    }
  }
  Tensor result = MakeResult(std::move(shape), std::move(v), {&a, &b});
  RecordIfNeeded(
      name, {a, b}, result,
      [da, db, out, kind](const TensorNode &o, Tape::Inputs in) {
        TensorNode &na = *in[0], &nb = *in[1];
        if (na.requires_grad) na.EnsureGrad();
        if (nb.requires_grad) nb.EnsureGrad();
        for (std::size_t i = 0; i < out.r; ++i) {
          std::size_t ra = (da.r == 1 ? 0 : i) * da.c;
          std::size_t rb = (db.r == 1 ? 0 : i) * db.c;
          for (std::size_t j = 0; j < out.c; ++j) {
            double g = o.grad[i * out.c + j];
            std::size_t ia = ra + (da.c == 1 ? 0 : j);
            std::size_t ib = rb + (db.c == 1 ? 0 : j);
            if (kind == Binary::kAdd) {
              if (na.requires_grad) na.grad[ia] += g;
              if (nb.requires_grad) nb.grad[ib] += g;
            } else {
              if (na.requires_grad) na.grad[ia] += g * nb.value[ib];
              if (nb.requires_grad) nb.grad[ib] += g * na.value[ia];
            }
          }
        }
      });
  return result;
}

// Decomposes a softmax/reduction axis into (outer, n, inner) strides.
struct AxisView {
  std::size_t outer, n, inner;
};

AxisView ResolveAxis(const Tensor &x, int axis, const char *op) {
  int rank = static_cast<int>(x.rank());
  if (rank == 0) return {1, 1, 1};
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank)
    Fail(ErrorKind::kDimension, std::string(op) + ": axis out of range for " +
                                    ShapeString(x.shape()));
  if (rank == 1) return {1, x.shape()[0], 1};
  if (axis == 1) return {x.shape()[0], x.shape()[1], 1};
  return {1, x.shape()[0], x.shape()[1]};
}

Tensor ReduceAxis(const Tensor &x, int axis, bool mean) {
  const char *name = mean ? "mean_axis" : "sum_axis";
  AxisView av = ResolveAxis(x, axis, name);
  if (av.n == 0)
    Fail(ErrorKind::kDimension, std::string(name) + ": empty axis");
  Shape shape;
  if (x.rank() == 2) {
    int resolved = axis < 0 ? axis + 2 : axis;
    shape = resolved == 1 ? Shape{x.shape()[0], 1} : Shape{1, x.shape()[1]};
  } else {
    shape = {1};
  }
  const double scale = mean ? 1.0 / static_cast<double>(av.n) : 1.0;
  auto xv = x.values();
  std::vector<double> v(av.outer * av.inner, 0.0);
  for (std::size_t o = 0; o < av.outer; ++o)
    for (std::size_t in = 0; in < av.inner; ++in) {
      double acc = 0.0;
      for (std::size_t t = 0; t < av.n; ++t)
        acc += xv[o * av.n * av.inner + t * av.inner + in];
      v[o * av.inner + in] = mean ? acc * scale : acc;
    }
  Tensor result = MakeResult(std::move(shape), std::move(v), {&x});
  RecordIfNeeded(name, {x}, result,
                 [av, scale](const TensorNode &o, Tape::Inputs in) {
                   TensorNode &nx = *in[0];
                   nx.EnsureGrad();
                   for (std::size_t a = 0; a < av.outer; ++a)
                     for (std::size_t i = 0; i < av.inner; ++i) {
                       double g = o.grad[a * av.inner + i] * scale;
                       for (std::size_t t = 0; t < av.n; ++t)
                         nx.grad[a * av.n * av.inner + t * av.inner + i] += g;
                     }
                 });
  return result;
}

}  // namespace

Tensor MatMul(const Tensor &a, const Tensor &b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0])
    Fail(ErrorKind::kDimension, "matmul: shape " + ShapeString(a.shape()) +
                                    " incompatible with " +
                                    ShapeString(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> v(m * n, 0.0);
  GemmAcc(m, k, n, a.values().data(), b.values().data(), v.data());
  Tensor result = MakeResult({m, n}, std::move(v), {&a, &b});
  RecordIfNeeded("matmul", {a, b}, result,
                 [m, k, n](const TensorNode &o, Tape::Inputs in) {
                   TensorNode &na = *in[0], &nb = *in[1];
                   if (na.requires_grad) {
                     // dA = dC . B^T
                     na.EnsureGrad();
                     std::vector<double> bt = TransposeValues(nb.value, k, n);
                     GemmAcc(m, n, k, o.grad.data(), bt.data(),
                             na.grad.data());
                   }
                   if (nb.requires_grad) {
                     // dB = A^T . dC
                     nb.EnsureGrad();
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t p = 0; p < k; ++p) {
                         const double aip = na.value[i * k + p];
                         double *__restrict gb = nb.grad.data() + p * n;
                         const double *gc = o.grad.data() + i * n;
                         for (std::size_t j = 0; j < n; ++j)
                           gb[j] += aip * gc[j];
                       }
                   }
                 });
  return result;
}

Tensor Add(const Tensor &a, const Tensor &b) {
  return BroadcastBinary(a, b, Binary::kAdd);
}

Tensor Mul(const Tensor &a, const Tensor &b) {
  return BroadcastBinary(a, b, Binary::kMul);
}

Tensor EmbeddingLookup(const Tensor &table, std::span<const std::size_t> ids) {
  if (table.rank() != 2)
    Fail(ErrorKind::kDimension, "embedding lookup: table must be rank 2, got " +
                                    ShapeString(table.shape()));
  const std::size_t vocab = table.shape()[0], d = table.shape()[1];
  std::vector<double> v(ids.size() * d);
  auto tv = table.values();
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab)
      Fail(ErrorKind::kDimension,
           "embedding lookup: id " + std::to_string(ids[r]) +
               " out of range for table " + ShapeString(table.shape()));
    std::copy_n(tv.begin() + ids[r] * d, d, v.begin() + r * d);
  }
  Tensor result = MakeResult({ids.size(), d}, std::move(v), {&table});
  if (result.requires_grad()) {
    std::vector<std::size_t> saved(ids.begin(), ids.end());
    RecordIfNeeded("embedding_lookup", {table}, result,
                   [saved = std::move(saved), d](const TensorNode &o,
                                                 Tape::Inputs in) {
                     TensorNode &nt = *in[0];
                     nt.EnsureGrad();
                     for (std::size_t r = 0; r < saved.size(); ++r)
                       for (std::size_t j = 0; j < d; ++j)
                         nt.grad[saved[r] * d + j] += o.grad[r * d + j];
                   });
  }
  return result;
}

Tensor LayerNorm(const Tensor &x, const Tensor &gain, const Tensor &bias,
                 double eps) {
  Dims dx = View2d(x.shape());
  const std::size_t d = dx.c;
  if (x.rank() == 0 || gain.size() != d || bias.size() != d)
    Fail(ErrorKind::kDimension, "layer_norm: input " + ShapeString(x.shape()) +
                                    " vs gain " + ShapeString(gain.shape()) +
                                    " and bias " + ShapeString(bias.shape()));
  auto xv = x.values(), gv = gain.values(), bv = bias.values();
  std::vector<double> v(x.size());
  auto stats = std::make_shared<std::vector<double>>(2 * dx.r);
  for (std::size_t i = 0; i < dx.r; ++i) {
    const double *row = xv.data() + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    (*stats)[2 * i] = mean;
    (*stats)[2 * i + 1] = rstd;
    for (std::size_t j = 0; j < d; ++j)
      v[i * d + j] = (row[j] - mean) * rstd * gv[j] + bv[j];
  }
  Tensor result = MakeResult(x.shape(), std::move(v), {&x, &gain, &bias});
  RecordIfNeeded(
      "layer_norm", {x, gain, bias}, result,
      [stats, rows = dx.r, d](const TensorNode &o, Tape::Inputs in) {
        TensorNode &nx = *in[0], &ng = *in[1], &nb = *in[2];
        if (nx.requires_grad) nx.EnsureGrad();
        if (ng.requires_grad) ng.EnsureGrad();
        if (nb.requires_grad) nb.EnsureGrad();
        std::vector<double> xhat(d), dxhat(d);
        const double inv_d = 1.0 / static_cast<double>(d);
        for (std::size_t i = 0; i < rows; ++i) {
          const double mean = (*stats)[2 * i], rstd = (*stats)[2 * i + 1];
          double sum1 = 0.0, sum2 = 0.0;
          for (std::size_t j = 0; j < d; ++j) {
            const double g = o.grad[i * d + j];
            xhat[j] = (nx.value[i * d + j] - mean) * rstd;
            dxhat[j] = g * ng.value[j];
            sum1 += dxhat[j];
            sum2 += dxhat[j] * xhat[j];
            if (ng.requires_grad) ng.grad[j] += g * xhat[j];
            if (nb.requires_grad) nb.grad[j] += g;
          }
          if (nx.requires_grad)
            for (std::size_t j = 0; j < d; ++j)
              nx.grad[i * d + j] +=
                  rstd * (dxhat[j] - sum1 * inv_d - xhat[j] * sum2 * inv_d);
        }
      });
  return result;
}

Tensor Gelu(const Tensor &x) {
  auto xv = x.values();
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * std::numbers::sqrt2 / 2.0));
  Tensor result = MakeResult(x.shape(), std::move(v), {&x});
  RecordIfNeeded("gelu", {x}, result,
                 [](const TensorNode &o, Tape::Inputs in) {
                   TensorNode &nx = *in[0];
                   nx.EnsureGrad();
                   const double inv_sqrt_2pi =
                       std::numbers::inv_sqrtpi / std::numbers::sqrt2;
                   for (std::size_t i = 0; i < nx.value.size(); ++i) {
                     const double z = nx.value[i];
                     const double cdf =
                         0.5 * (1.0 + std::erf(z * std::numbers::sqrt2 / 2.0));
                     const double pdf = inv_sqrt_2pi * std::exp(-0.5 * z * z);
                     nx.grad[i] += o.grad[i] * (cdf + z * pdf);
                   }
                 });
  return result;
}

Tensor Softmax(const Tensor &x, int axis) {
  AxisView av = ResolveAxis(x, axis, "softmax");
  if (av.n == 0) Fail(ErrorKind::kDimension, "softmax: empty axis");
  auto xv = x.values();
  std::vector<double> v(x.size());
  for (std::size_t o = 0; o < av.outer; ++o)
    for (std::size_t in = 0; in < av.inner; ++in) {
      const std::size_t base = o * av.n * av.inner + in;
      double mx = xv[base];
      for (std::size_t t = 1; t < av.n; ++t)
        mx = std::max(mx, xv[base + t * av.inner]);
      double total = 0.0;
      for (std::size_t t = 0; t < av.n; ++t) {
        const double e = std::exp(xv[base + t * av.inner] - mx);
        v[base + t * av.inner] = e;
        total += e;
      }
      for (std::size_t t = 0; t < av.n; ++t) v[base + t * av.inner] /= total;
    }
  Tensor result = MakeResult(x.shape(), std::move(v), {&x});
  RecordIfNeeded("softmax", {x}, result,
                 [av](const TensorNode &o, Tape::Inputs in) {
                   TensorNode &nx = *in[0];
                   nx.EnsureGrad();
                   for (std::size_t a = 0; a < av.outer; ++a)
                     for (std::size_t i = 0; i < av.inner; ++i) {
                       const std::size_t base = a * av.n * av.inner + i;
                       double dot = 0.0;
                       for (std::size_t t = 0; t < av.n; ++t) {
                         const std::size_t k = base + t * av.inner;
                         dot += o.grad[k] * o.value[k];
                       }
                       for (std::size_t t = 0; t < av.n; ++t) {
                         const std::size_t k = base + t * av.inner;
                         nx.grad[k] += o.value[k] * (o.grad[k] - dot);
                       }
                     }
                 });
  return result;
}

Tensor Log(const Tensor &x) {
  auto xv = x.values();
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(xv[i]);
  Tensor result = MakeResult(x.shape(), std::move(v), {&x});
  RecordIfNeeded("log", {x}, result, [](const TensorNode &o, Tape::Inputs in) {
    TensorNode &nx = *in[0];
    nx.EnsureGrad();
    for (std::size_t i = 0; i < nx.value.size(); ++i)
      nx.grad[i] += o.grad[i] / nx.value[i];
  });
  return result;
}

Tensor Sum(const Tensor &x) {
  double acc = 0.0;
  for (double e : x.values()) acc += e;
  Tensor result = MakeResult({}, {acc}, {&x});
  RecordIfNeeded("sum", {x}, result, [](const TensorNode &o, Tape::Inputs in) {
    TensorNode &nx = *in[0];
    nx.EnsureGrad();
    for (double &g : nx.grad) g += o.grad[0];
  });
  return result;
}

Tensor Sum(const Tensor &x, int axis) { return ReduceAxis(x, axis, false); }

Tensor Mean(const Tensor &x) {
  if (x.size() == 0) Fail(ErrorKind::kDimension, "mean: empty tensor");
  double acc = 0.0;
  for (double e : x.values()) acc += e;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  Tensor result = MakeResult({}, {acc * inv_n}, {&x});
  RecordIfNeeded("mean", {x}, result,
                 [inv_n](const TensorNode &o, Tape::Inputs in) {
                   TensorNode &nx = *in[0];
                   nx.EnsureGrad();
                   for (double &g : nx.grad) g += o.grad[0] * inv_n;
                 });
  return result;
}

Tensor Mean(const Tensor &x, int axis) { return ReduceAxis(x, axis, true); }

Tensor Transpose(const Tensor &a) {
  Dims d = View2d(a.shape());
  Tensor result =
      MakeResult({d.c, d.r}, TransposeValues(a.values(), d.r, d.c), {&a});
  RecordIfNeeded("transpose", {a}, result,
                 [d](const TensorNode &o, Tape::Inputs in) {
                   TensorNode &na = *in[0];
                   na.EnsureGrad();
                   for (std::size_t i = 0; i < d.r; ++i)
                     for (std::size_t j = 0; j < d.c; ++j)
                       na.grad[i * d.c + j] += o.grad[j * d.r + i];
                 });
  return result;
}

Tensor ConcatRows(std::span<const Tensor> parts) {
  if (parts.empty()) Fail(ErrorKind::kDimension, "concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Tensor &p : parts) {
    if (p.cols() != cols)
      Fail(ErrorKind::kDimension,
           "concat_rows: shape " + ShapeString(p.shape()) +
               " incompatible with " + ShapeString(parts[0].shape()));
    rows += p.rows();
  }
  std::vector<double> v;
  v.reserve(rows * cols);
  bool needs = false;
  for (const Tensor &p : parts) {
    v.insert(v.end(), p.values().begin(), p.values().end());
    needs = needs || p.requires_grad();
  }
  Tensor result = Tensor::FromValues({rows, cols}, std::move(v));
  needs = needs && IsRecording();
  result.set_requires_grad(needs);
  result.node()->is_leaf = !needs;
  RecordIfNeeded("concat_rows", {parts.begin(), parts.end()}, result,
                 [](const TensorNode &o, Tape::Inputs in) {
                   std::size_t offset = 0;
                   for (const auto &p : in) {
                     const std::size_t n = p->value.size();
                     if (p->requires_grad) {
                       p->EnsureGrad();
                       for (std::size_t i = 0; i < n; ++i)
                         p->grad[i] += o.grad[offset + i];
                     }
                     offset += n;
                   }
                 });
  return result;
}

}  // namespace diff
}  // namespace rescore
