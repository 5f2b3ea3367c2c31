// Copyright 2026 The ClozeForge Authors.
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

#include "clozeforge/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clozeforge/errors.hpp"
#include "clozeforge/rng.hpp"

namespace clozeforge::ops {
namespace {

[[noreturn]] void mismatch(std::string_view op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                   to_string(b.shape()));
}

[[noreturn]] void bad_shape(std::string_view op, const Tensor& a, std::string_view what) {
  throw ShapeError(std::string(op) + ": " + std::string(what) + ", got " + to_string(a.shape()));
}

std::vector<std::size_t> resolve_segments(std::string_view op, std::size_t rows,
                                          std::span<const std::size_t> segments) {
  if (segments.empty()) return {rows};
  std::size_t total = 0;
  for (std::size_t s : segments) {
    if (s == 0) throw ShapeError(std::string(op) + ": empty sequence segment");
    total += s;
  }
  if (total != rows) {
    throw ShapeError(std::string(op) + ": segment lengths sum to " + std::to_string(total) +
                     " but input has " + std::to_string(rows) + " rows");
  }
  return {segments.begin(), segments.end()};
}

template <typename Fwd, typename Deriv>
Var unary(Graph& g, Var a, OpKind kind, Fwd fwd, Deriv deriv) {
  const Tensor& in = g.value(a);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return g.record(kind, {a}, std::move(out), [a, deriv](Graph& gr, std::span<const double> dy) {
    if (!gr.requires_grad(a)) return;
    const Tensor& x = gr.value(a);
    auto dx = gr.grad_buffer(a);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * deriv(x[i]);
  });
}

}  // namespace

Var matmul(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.rank() > 2 || B.rank() > 2) mismatch("matmul", A, B);
  const std::size_t m = A.rank() == 2 ? A.dim(0) : 1;
  const std::size_t k = A.rank() == 2 ? A.dim(1) : A.dim(0);
  const std::size_t kb = B.dim(0);
  const std::size_t n = B.rank() == 2 ? B.dim(1) : 1;
  if (k != kb) mismatch("matmul", A, B);

  Shape out_shape;
  if (A.rank() == 2 && B.rank() == 2) out_shape = {m, n};
  else if (A.rank() == 2) out_shape = {m};
  else if (B.rank() == 2) out_shape = {n};
  else out_shape = {1};

  Tensor C(out_shape);
  const double* pa = A.data();
  const double* pb = B.data();
  double* pc = C.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return g.record(OpKind::matmul, {a, b}, std::move(C),
                  [a, b, m, k, n](Graph& gr, std::span<const double> dc) {
                    const double* pa = gr.value(a).data();
                    const double* pb = gr.value(b).data();
                    if (gr.requires_grad(a)) {
                      auto da = gr.grad_buffer(a);
                      for (std::size_t i = 0; i < m; ++i) {
                        const double* dcrow = dc.data() + i * n;
                        for (std::size_t p = 0; p < k; ++p) {
                          const double* brow = pb + p * n;
                          double acc = 0.0;
                          for (std::size_t j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
                          da[i * k + p] += acc;
                        }
                      }
                    }
                    if (gr.requires_grad(b)) {
                      auto db = gr.grad_buffer(b);
                      for (std::size_t i = 0; i < m; ++i) {
                        const double* dcrow = dc.data() + i * n;
                        for (std::size_t p = 0; p < k; ++p) {
                          const double av = pa[i * k + p];
                          if (av == 0.0) continue;
                          double* dbrow = db.data() + p * n;
                          for (std::size_t j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
                        }
                      }
                    }
                  });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.shape() == B.shape()) {
    Tensor C(A.shape());
    for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] + B[i];
    return g.record(OpKind::add, {a, b}, std::move(C), [a, b](Graph& gr, std::span<const double> dc) {
      for (Var v : {a, b}) {
        if (!gr.requires_grad(v)) continue;
        auto d = gr.grad_buffer(v);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[i];
      }
    });
  }
  if (A.rank() != 2 || B.rank() != 1 || A.dim(1) != B.dim(0)) mismatch("add", A, B);
  const std::size_t rows = A.dim(0);
  const std::size_t cols = A.dim(1);
  Tensor C(A.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) C[r * cols + c] = A[r * cols + c] + B[c];
  return g.record(OpKind::add, {a, b}, std::move(C),
                  [a, b, rows, cols](Graph& gr, std::span<const double> dc) {
                    if (gr.requires_grad(a)) {
                      auto da = gr.grad_buffer(a);
                      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dc[i];
                    }
                    if (gr.requires_grad(b)) {
                      auto db = gr.grad_buffer(b);
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < cols; ++c) db[c] += dc[r * cols + c];
                    }
                  });
}

Var subtract(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.shape() != B.shape()) mismatch("subtract", A, B);
  Tensor C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] - B[i];
  return g.record(OpKind::subtract, {a, b}, std::move(C), [a, b](Graph& gr, std::span<const double> dc) {
    if (gr.requires_grad(a)) {
      auto da = gr.grad_buffer(a);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dc[i];
    }
    if (gr.requires_grad(b)) {
      auto db = gr.grad_buffer(b);
      for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dc[i];
    }
  });
}

Var multiply(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.shape() != B.shape()) mismatch("multiply", A, B);
  Tensor C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] * B[i];
  return g.record(OpKind::multiply, {a, b}, std::move(C), [a, b](Graph& gr, std::span<const double> dc) {
    const Tensor& A = gr.value(a);
    const Tensor& B = gr.value(b);
    if (gr.requires_grad(a)) {
      auto da = gr.grad_buffer(a);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dc[i] * B[i];
    }
    if (gr.requires_grad(b)) {
      auto db = gr.grad_buffer(b);
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += dc[i] * A[i];
    }
  });
}

Var scale(Graph& g, Var a, double factor) {
  const Tensor& A = g.value(a);
  Tensor C(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) C[i] = A[i] * factor;
  return g.record(OpKind::scale, {a}, std::move(C), [a, factor](Graph& gr, std::span<const double> dc) {
    if (!gr.requires_grad(a)) return;
    auto da = gr.grad_buffer(a);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += dc[i] * factor;
  });
}

Var sum(Graph& g, Var a) {
  const Tensor& A = g.value(a);
  const double total = std::accumulate(A.values().begin(), A.values().end(), 0.0);
  return g.record(OpKind::sum, {a}, Tensor::scalar(total), [a](Graph& gr, std::span<const double> dc) {
    if (!gr.requires_grad(a)) return;
    auto da = gr.grad_buffer(a);
    for (double& d : da) d += dc[0];
  });
}

Var mean(Graph& g, Var a) {
  const Tensor& A = g.value(a);
  const double n = static_cast<double>(A.size());
  const double total = std::accumulate(A.values().begin(), A.values().end(), 0.0);
  return g.record(OpKind::mean, {a}, Tensor::scalar(total / n), [a, n](Graph& gr, std::span<const double> dc) {
    if (!gr.requires_grad(a)) return;
    auto da = gr.grad_buffer(a);
    for (double& d : da) d += dc[0] / n;
  });
}

Var concat(Graph& g, std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Tensor& first = g.value(parts[0]);
  std::vector<Var> inputs(parts.begin(), parts.end());

  if (first.rank() == 1) {
    if (axis != 0) bad_shape("concat", first, "vectors concatenate along axis 0 only");
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    for (Var p : parts) {
      const Tensor& t = g.value(p);
      if (t.rank() != 1) mismatch("concat", first, t);
      offsets.push_back(out.size());
      out.insert(out.end(), t.values().begin(), t.values().end());
    }
    return g.record(OpKind::concat, inputs, Tensor::vector(std::move(out)),
                    [inputs, offsets](Graph& gr, std::span<const double> dc) {
                      for (std::size_t i = 0; i < inputs.size(); ++i) {
                        if (!gr.requires_grad(inputs[i])) continue;
                        auto d = gr.grad_buffer(inputs[i]);
                        for (std::size_t j = 0; j < d.size(); ++j) d[j] += dc[offsets[i] + j];
                      }
                    });
  }

  if (first.rank() != 2 || axis > 1) bad_shape("concat", first, "expected vectors or matrices");
  if (axis == 0) {
    const std::size_t cols = first.dim(1);
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    std::size_t rows = 0;
    for (Var p : parts) {
      const Tensor& t = g.value(p);
      if (t.rank() != 2 || t.dim(1) != cols) mismatch("concat", first, t);
      offsets.push_back(out.size());
      out.insert(out.end(), t.values().begin(), t.values().end());
      rows += t.dim(0);
    }
    return g.record(OpKind::concat, inputs, Tensor::matrix(rows, cols, std::move(out)),
                    [inputs, offsets](Graph& gr, std::span<const double> dc) {
                      for (std::size_t i = 0; i < inputs.size(); ++i) {
                        if (!gr.requires_grad(inputs[i])) continue;
                        auto d = gr.grad_buffer(inputs[i]);
                        for (std::size_t j = 0; j < d.size(); ++j) d[j] += dc[offsets[i] + j];
                      }
                    });
  }

  const std::size_t rows = first.dim(0);
  std::vector<std::size_t> col_offsets;
  std::size_t cols = 0;
  for (Var p : parts) {
    const Tensor& t = g.value(p);
    if (t.rank() != 2 || t.dim(0) != rows) mismatch("concat", first, t);
    col_offsets.push_back(cols);
    cols += t.dim(1);
  }
  Tensor out({rows, cols});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& t = g.value(parts[i]);
    const std::size_t w = t.dim(1);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) out[r * cols + col_offsets[i] + c] = t[r * w + c];
  }
  return g.record(OpKind::concat, inputs, std::move(out),
                  [inputs, col_offsets, rows, cols](Graph& gr, std::span<const double> dc) {
                    for (std::size_t i = 0; i < inputs.size(); ++i) {
                      if (!gr.requires_grad(inputs[i])) continue;
                      auto d = gr.grad_buffer(inputs[i]);
                      const std::size_t w = d.size() / rows;
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < w; ++c)
                          d[r * w + c] += dc[r * cols + col_offsets[i] + c];
                    }
                  });
}

Var stack(Graph& g, std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack: no inputs");
  const Tensor& first = g.value(rows[0]);
  if (first.rank() != 1) bad_shape("stack", first, "expected vectors");
  const std::size_t d = first.dim(0);
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (Var r : rows) {
    const Tensor& t = g.value(r);
    if (t.shape() != first.shape()) mismatch("stack", first, t);
    out.insert(out.end(), t.values().begin(), t.values().end());
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return g.record(OpKind::stack, inputs, Tensor::matrix(rows.size(), d, std::move(out)),
                  [inputs, d](Graph& gr, std::span<const double> dc) {
                    for (std::size_t i = 0; i < inputs.size(); ++i) {
                      if (!gr.requires_grad(inputs[i])) continue;
                      auto dr = gr.grad_buffer(inputs[i]);
                      for (std::size_t j = 0; j < d; ++j) dr[j] += dc[i * d + j];
                    }
                  });
}

Var slice(Graph& g, Var a, std::size_t begin, std::size_t end) {
  const Tensor& A = g.value(a);
  if (A.rank() > 2) bad_shape("slice", A, "expected vector or matrix");
  const std::size_t len = A.dim(0);
  if (begin >= end || end > len) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for shape " + to_string(A.shape()));
  }
  const std::size_t width = A.rank() == 2 ? A.dim(1) : 1;
  Shape shape = A.shape();
  shape[0] = end - begin;
  std::vector<double> out(A.values().begin() + begin * width, A.values().begin() + end * width);
  const std::size_t offset = begin * width;
  return g.record(OpKind::slice, {a}, Tensor(shape, std::move(out)),
                  [a, offset](Graph& gr, std::span<const double> dc) {
                    if (!gr.requires_grad(a)) return;
                    auto da = gr.grad_buffer(a);
                    for (std::size_t i = 0; i < dc.size(); ++i) da[offset + i] += dc[i];
                  });
}

Var row(Graph& g, Var a, std::size_t i) {
  const Tensor& A = g.value(a);
  if (A.rank() != 2) bad_shape("row", A, "expected matrix");
  if (i >= A.dim(0)) {
    throw ShapeError("row: index " + std::to_string(i) + " out of range for " + to_string(A.shape()));
  }
  const std::size_t width = A.dim(1);
  std::vector<double> out(A.values().begin() + i * width, A.values().begin() + (i + 1) * width);
  const std::size_t offset = i * width;
  return g.record(OpKind::slice, {a}, Tensor::vector(std::move(out)),
                  [a, offset](Graph& gr, std::span<const double> dc) {
                    if (!gr.requires_grad(a)) return;
                    auto da = gr.grad_buffer(a);
                    for (std::size_t j = 0; j < dc.size(); ++j) da[offset + j] += dc[j];
                  });
}

Var transpose(Graph& g, Var a) {
  const Tensor& A = g.value(a);
  if (A.rank() != 2) bad_shape("transpose", A, "expected matrix");
  const std::size_t m = A.dim(0), n = A.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = A[i * n + j];
  }
  return g.record(OpKind::transpose, {a}, std::move(out), [a, m, n](Graph& gr, std::span<const double> dc) {
    if (!gr.requires_grad(a)) return;
    auto da = gr.grad_buffer(a);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) da[i * n + j] += dc[j * m + i];
    }
  });
}

Var reshape(Graph& g, Var a, Shape shape) {
  const Tensor& A = g.value(a);
  if (shape.empty() || shape_size(shape) != A.size()) {
    throw ShapeError("reshape: cannot view " + to_string(A.shape()) + " as " + to_string(shape));
  }
  return g.record(OpKind::reshape, {a}, Tensor(std::move(shape), std::vector<double>(A.values().begin(), A.values().end())),
                  [a](Graph& gr, std::span<const double> dc) {
                    if (!gr.requires_grad(a)) return;
                    auto da = gr.grad_buffer(a);
                    for (std::size_t i = 0; i < dc.size(); ++i) da[i] += dc[i];
                  });
}

Var sigmoid(Graph& g, Var a) {
  const auto f = [](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  const Tensor& in = g.value(a);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  const std::uint32_t self = static_cast<std::uint32_t>(g.size());
  return g.record(OpKind::sigmoid, {a}, std::move(out), [a, self](Graph& gr, std::span<const double> dy) {
    if (!gr.requires_grad(a)) return;
    const Tensor& y = gr.value(Var{self});
    auto dx = gr.grad_buffer(a);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Graph& g, Var a) {
  const Tensor& in = g.value(a);
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
  const std::uint32_t self = static_cast<std::uint32_t>(g.size());
  return g.record(OpKind::tanh, {a}, std::move(out), [a, self](Graph& gr, std::span<const double> dy) {
    if (!gr.requires_grad(a)) return;
    const Tensor& y = gr.value(Var{self});
    auto dx = gr.grad_buffer(a);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
  });
}

Var relu(Graph& g, Var a) {
  return unary(
      g, a, OpKind::relu, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log(Graph& g, Var a) {
  return unary(
      g, a, OpKind::log, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var softmax(Graph& g, Var a) {
  const Tensor& in = g.value(a);
  if (in.rank() > 2 || in.size() == 0) bad_shape("softmax", in, "needs a non-empty vector or matrix");
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  if (cols == 0) bad_shape("softmax", in, "empty axis");
  Tensor out(in.shape());
  std::vector<double> sorted(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * cols;
    double* y = out.data() + r * cols;
    const double mx = *std::max_element(x, x + cols);
    for (std::size_t c = 0; c < cols; ++c) y[c] = std::exp(x[c] - mx);
    std::copy(y, y + cols, sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    const double z = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    for (std::size_t c = 0; c < cols; ++c) y[c] /= z;
  }
  const std::uint32_t self = static_cast<std::uint32_t>(g.size());
  return g.record(OpKind::softmax, {a}, std::move(out),
                  [a, self, rows, cols](Graph& gr, std::span<const double> dy) {
                    if (!gr.requires_grad(a)) return;
                    const Tensor& y = gr.value(Var{self});
                    auto dx = gr.grad_buffer(a);
                    for (std::size_t r = 0; r < rows; ++r) {
                      double dot = 0.0;
                      for (std::size_t c = 0; c < cols; ++c) dot += y[r * cols + c] * dy[r * cols + c];
                      for (std::size_t c = 0; c < cols; ++c)
                        dx[r * cols + c] += y[r * cols + c] * (dy[r * cols + c] - dot);
                    }
                  });
}

Var embedding_gather(Graph& g, Var table, std::span<const std::int32_t> ids) {
  const Tensor& T = g.value(table);
  if (T.rank() != 2) bad_shape("embedding_gather", T, "table must be a matrix");
  if (ids.empty()) throw ShapeError("embedding_gather: empty id sequence");
  const std::size_t vocab = T.dim(0);
  const std::size_t d = T.dim(1);
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw ShapeError("embedding_gather: id " + std::to_string(ids[i]) + " outside table " +
                       to_string(T.shape()));
    }
    std::copy_n(T.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  std::vector<std::int32_t> saved(ids.begin(), ids.end());
  return g.record(OpKind::embedding_gather, {table}, std::move(out),
                  [table, saved = std::move(saved), d](Graph& gr, std::span<const double> dy) {
                    if (!gr.requires_grad(table)) return;
                    auto dt = gr.grad_buffer(table);
                    for (std::size_t i = 0; i < saved.size(); ++i) {
                      double* dst = dt.data() + static_cast<std::size_t>(saved[i]) * d;
                      for (std::size_t j = 0; j < d; ++j) dst[j] += dy[i * d + j];
                    }
                  });
}

Var dilated_conv1d(Graph& g, Var x, Var kernel, Var bias, std::size_t dilation,
                   std::span<const std::size_t> segments) {
  const Tensor& X = g.value(x);
  const Tensor& K = g.value(kernel);
  const Tensor& B = g.value(bias);
  if (X.rank() != 2) bad_shape("dilated_conv1d", X, "input must be [N, c_in]");
  if (K.rank() != 3 || K.dim(1) != X.dim(1)) mismatch("dilated_conv1d", X, K);
  if (B.rank() != 1 || B.dim(0) != K.dim(2)) mismatch("dilated_conv1d", K, B);
  if (dilation == 0) throw ShapeError("dilated_conv1d: dilation must be positive");

  const std::size_t width = K.dim(0);
  const std::size_t cin = K.dim(1);
  const std::size_t cout = K.dim(2);
  const auto segs = resolve_segments("dilated_conv1d", X.dim(0), segments);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>((width - 1) / 2);
  const std::ptrdiff_t dil = static_cast<std::ptrdiff_t>(dilation);

  Tensor Y({X.dim(0), cout});
  std::size_t base = 0;
  for (std::size_t len : segs) {
    const auto L = static_cast<std::ptrdiff_t>(len);
    for (std::ptrdiff_t t = 0; t < L; ++t) {
      double* y = Y.data() + (base + static_cast<std::size_t>(t)) * cout;
      std::copy_n(B.data(), cout, y);
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t src = t + (static_cast<std::ptrdiff_t>(k) - half) * dil;
        if (src < 0 || src >= L) continue;
        const double* xr = X.data() + (base + static_cast<std::size_t>(src)) * cin;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double xv = xr[ci];
          if (xv == 0.0) continue;
          const double* kr = K.data() + (k * cin + ci) * cout;
          for (std::size_t co = 0; co < cout; ++co) y[co] += xv * kr[co];
        }
      }
    }
    base += len;
  }

  return g.record(
      OpKind::dilated_conv1d, {x, kernel, bias}, std::move(Y),
      [x, kernel, bias, segs, width, cin, cout, half, dil](Graph& gr, std::span<const double> dy) {
        const Tensor& X = gr.value(x);
        const Tensor& K = gr.value(kernel);
        const bool gx = gr.requires_grad(x);
        const bool gk = gr.requires_grad(kernel);
        std::span<double> dx = gx ? gr.grad_buffer(x) : std::span<double>{};
        std::span<double> dk = gk ? gr.grad_buffer(kernel) : std::span<double>{};
        if (gr.requires_grad(bias)) {
          auto db = gr.grad_buffer(bias);
          for (std::size_t r = 0; r < X.dim(0); ++r)
            for (std::size_t co = 0; co < cout; ++co) db[co] += dy[r * cout + co];
        }
        if (!gx && !gk) return;
        std::size_t base = 0;
        for (std::size_t len : segs) {
          const auto L = static_cast<std::ptrdiff_t>(len);
          for (std::ptrdiff_t t = 0; t < L; ++t) {
            const double* dyr = dy.data() + (base + static_cast<std::size_t>(t)) * cout;
            for (std::size_t k = 0; k < width; ++k) {
              const std::ptrdiff_t src = t + (static_cast<std::ptrdiff_t>(k) - half) * dil;
              if (src < 0 || src >= L) continue;
              const std::size_t xrow = (base + static_cast<std::size_t>(src)) * cin;
              for (std::size_t ci = 0; ci < cin; ++ci) {
                const double* kr = K.data() + (k * cin + ci) * cout;
                if (gx) {
                  double acc = 0.0;
                  for (std::size_t co = 0; co < cout; ++co) acc += dyr[co] * kr[co];
                  dx[xrow + ci] += acc;
                }
                if (gk) {
                  const double xv = X[xrow + ci];
                  double* dkr = dk.data() + (k * cin + ci) * cout;
                  for (std::size_t co = 0; co < cout; ++co) dkr[co] += xv * dyr[co];
                }
              }
            }
          }
          base += len;
        }
      });
}

Var max_over_time_pool(Graph& g, Var x, std::span<const std::size_t> segments) {
  const Tensor& X = g.value(x);
  if (X.rank() != 2) bad_shape("max_over_time_pool", X, "input must be [N, c]");
  const std::size_t c = X.dim(1);
  const auto segs = resolve_segments("max_over_time_pool", X.dim(0), segments);
  Tensor Y({segs.size(), c});
  std::vector<std::size_t> arg(segs.size() * c);
  std::size_t base = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      std::size_t best = base;
      for (std::size_t r = base + 1; r < base + segs[s]; ++r) {
        if (X[r * c + ch] > X[best * c + ch]) best = r;
      }
      arg[s * c + ch] = best;
      Y[s * c + ch] = X[best * c + ch];
    }
    base += segs[s];
  }
  return g.record(OpKind::max_over_time_pool, {x}, std::move(Y),
                  [x, arg = std::move(arg), c](Graph& gr, std::span<const double> dy) {
                    if (!gr.requires_grad(x)) return;
                    auto dx = gr.grad_buffer(x);
                    for (std::size_t i = 0; i < arg.size(); ++i) dx[arg[i] * c + i % c] += dy[i];
                  });
}

Var batch_norm(Graph& g, Var x, Var gamma, Var beta, const BatchNormState& state) {
  const Tensor& X = g.value(x);
  const Tensor& G = g.value(gamma);
  const Tensor& Bt = g.value(beta);
  if (X.rank() != 2) bad_shape("batch_norm", X, "input must be [N, c]");
  const std::size_t n = X.dim(0);
  const std::size_t c = X.dim(1);
  if (G.shape() != Shape{c}) mismatch("batch_norm", X, G);
  if (Bt.shape() != Shape{c}) mismatch("batch_norm", X, Bt);
  if (!state.running_mean || !state.running_var) throw ShapeError("batch_norm: missing running statistics");
  if (state.running_mean->value.shape() != Shape{c}) mismatch("batch_norm", X, state.running_mean->value);
  if (state.running_var->value.shape() != Shape{c}) mismatch("batch_norm", X, state.running_var->value);

  std::vector<double> mu(c, 0.0);
  std::vector<double> inv_std(c, 0.0);
  if (g.training()) {
    if (n < 2) throw ShapeError("batch_norm: training needs at least 2 rows, got " + std::to_string(n));
    std::vector<double> var(c, 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t ch = 0; ch < c; ++ch) mu[ch] += X[r * c + ch];
    for (double& m : mu) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double d = X[r * c + ch] - mu[ch];
        var[ch] += d * d;
      }
    auto& rm = state.running_mean->value;
    auto& rv = state.running_var->value;
    for (std::size_t ch = 0; ch < c; ++ch) {
      var[ch] /= static_cast<double>(n);
      inv_std[ch] = 1.0 / std::sqrt(var[ch] + state.eps);
      const double unbiased = var[ch] * static_cast<double>(n) / static_cast<double>(n - 1);
      rm[ch] = state.momentum * rm[ch] + (1.0 - state.momentum) * mu[ch];
      rv[ch] = state.momentum * rv[ch] + (1.0 - state.momentum) * unbiased;
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mu[ch] = state.running_mean->value[ch];
      inv_std[ch] = 1.0 / std::sqrt(state.running_var->value[ch] + state.eps);
    }
  }

  Tensor xhat({n, c});
  Tensor Y({n, c});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double h = (X[r * c + ch] - mu[ch]) * inv_std[ch];
      xhat[r * c + ch] = h;
      Y[r * c + ch] = G[ch] * h + Bt[ch];
    }

  const bool batch_stats = g.training();
  return g.record(
      OpKind::batch_norm, {x, gamma, beta}, std::move(Y),
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), n, c,
       batch_stats](Graph& gr, std::span<const double> dy) {
        const Tensor& G = gr.value(gamma);
        if (gr.requires_grad(gamma)) {
          auto dg = gr.grad_buffer(gamma);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t ch = 0; ch < c; ++ch) dg[ch] += dy[r * c + ch] * xhat[r * c + ch];
        }
        if (gr.requires_grad(beta)) {
          auto db = gr.grad_buffer(beta);
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t ch = 0; ch < c; ++ch) db[ch] += dy[r * c + ch];
        }
        if (!gr.requires_grad(x)) return;
        auto dx = gr.grad_buffer(x);
        if (!batch_stats) {
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t ch = 0; ch < c; ++ch) dx[r * c + ch] += dy[r * c + ch] * G[ch] * inv_std[ch];
          return;
        }
        const double nn = static_cast<double>(n);
        std::vector<double> sum_d(c, 0.0);
        std::vector<double> sum_dx(c, 0.0);
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const double dh = dy[r * c + ch] * G[ch];
            sum_d[ch] += dh;
            sum_dx[ch] += dh * xhat[r * c + ch];
          }
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const double dh = dy[r * c + ch] * G[ch];
            dx[r * c + ch] +=
                inv_std[ch] / nn * (nn * dh - sum_d[ch] - xhat[r * c + ch] * sum_dx[ch]);
          }
      });
}

Var dropout(Graph& g, Var x, double rate) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
  if (!g.training() || rate == 0.0) return x;
  const Tensor& X = g.value(x);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(X.size());
  for (double& m : mask) m = uniform01(g.rng()) >= rate ? keep_scale : 0.0;
  Tensor Y(X.shape());
  for (std::size_t i = 0; i < X.size(); ++i) Y[i] = X[i] * mask[i];
  return g.record(OpKind::dropout, {x}, std::move(Y),
                  [x, mask = std::move(mask)](Graph& gr, std::span<const double> dy) {
                    if (!gr.requires_grad(x)) return;
                    auto dx = gr.grad_buffer(x);
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * mask[i];
                  });
}

Var cross_entropy(Graph& g, Var probs, std::size_t target) {
  const Tensor& P = g.value(probs);
  if (P.rank() != 1) bad_shape("cross_entropy", P, "expects a probability vector");
  if (target >= P.size()) {
    throw ShapeError("cross_entropy: target " + std::to_string(target) + " outside " + to_string(P.shape()));
  }
  const double p = P[target];
  const bool clamped = p <= kLogClamp;  // NaN stays NaN
  const double loss = -std::log(clamped ? kLogClamp : p);
  return g.record(OpKind::cross_entropy, {probs}, Tensor::scalar(loss),
                  [probs, target, clamped](Graph& gr, std::span<const double> dy) {
                    if (!gr.requires_grad(probs) || clamped) return;
                    auto dp = gr.grad_buffer(probs);
                    dp[target] -= dy[0] / gr.value(probs)[target];
                  });
}

}  // namespace clozeforge::ops
