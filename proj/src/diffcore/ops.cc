// Copyright 2026 The SCST Lab Authors.
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

#include "scst/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scst/error.h"

namespace scst {

void gemv_acc(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  const double* wp = w.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = wp + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] += acc;
  }
}

void gemv_t_acc(const Tensor& w, std::span<const double> dy, std::span<double> dx) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  const double* wp = w.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* wr = wp + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dx[c] += wr[c] * g;
  }
}

void outer_acc(Tensor& dw, std::span<const double> dy, std::span<const double> x) {
  const std::size_t rows = dw.rows();
  const std::size_t cols = dw.cols();
  double* dp = dw.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    double* dr = dp + r * cols;
    for (std::size_t c = 0; c < cols; ++c) dr[c] += g * x[c];
  }
}

void sigmoid_inplace(std::span<double> v) {
  for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
}

void tanh_inplace(std::span<double> v) {
  for (double& x : v) x = std::tanh(x);
}

void softmax_inplace(std::span<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    z += x;
  }
  for (double& x : v) x /= z;
}

void softmax_backward_inplace(std::span<const double> y, std::span<double> dy) {
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  for (std::size_t i = 0; i < y.size(); ++i) dy[i] = y[i] * (dy[i] - dot);
}

void maxout2_forward(std::span<const double> in, std::span<double> out,
                     std::span<std::uint8_t> arg) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double a = in[2 * j];
    const double b = in[2 * j + 1];
    if (b > a) {
      out[j] = b;
      arg[j] = 1;
    } else {
      out[j] = a;
      arg[j] = 0;
    }
  }
}

void maxout2_backward(std::span<const double> dout,
                      std::span<const std::uint8_t> arg, std::span<double> din) {
  for (std::size_t j = 0; j < dout.size(); ++j) din[2 * j + arg[j]] += dout[j];
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double x : v) z += std::exp(x - m);
  return m + std::log(z);
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

Tensor finite(Tensor t, const char* op) {
  t.check_finite(op);
  return t;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw DimensionError("matmul: operands must be rank 2");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ, " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a.at(i, p);
      for (std::size_t j = 0; j < m; ++j) out.at(i, j) += aip * b.at(p, j);
    }
  }
  return finite(std::move(out), "matmul");
}

MatmulGrad matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dout) {
  if (a.rank() != 2 || b.rank() != 2 || dout.rank() != 2 || a.cols() != b.rows() ||
      dout.rows() != a.rows() || dout.cols() != b.cols()) {
    throw DimensionError("matmul_backward: inconsistent shapes");
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor da({n, k});
  Tensor db({k, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        acc += dout.at(i, j) * b.at(p, j);
        db.at(p, j) += a.at(i, p) * dout.at(i, j);
      }
      da.at(i, p) = acc;
    }
  }
  return {finite(std::move(da), "matmul_backward"), finite(std::move(db), "matmul_backward")};
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  sigmoid_inplace(y.data());
  return finite(std::move(y), "sigmoid");
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "sigmoid_backward");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
  return finite(std::move(dx), "sigmoid_backward");
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  tanh_inplace(y.data());
  return finite(std::move(y), "tanh");
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "tanh_backward");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= 1.0 - y[i] * y[i];
  return finite(std::move(dx), "tanh_backward");
}

Tensor softmax(const Tensor& x) {
  x.check_finite("softmax input");
  Tensor y = x;
  for (std::size_t r = 0; r < y.rows(); ++r) softmax_inplace(y.row(r));
  return finite(std::move(y), "softmax");
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "softmax_backward");
  Tensor dx = dy;
  for (std::size_t r = 0; r < y.rows(); ++r) softmax_backward_inplace(y.row(r), dx.row(r));
  return finite(std::move(dx), "softmax_backward");
}

Tensor maxout2(const Tensor& x) {
  if (x.cols() % 2 != 0) {
    throw DimensionError("maxout2: odd last extent " + std::to_string(x.cols()));
  }
  Shape out_shape = x.shape();
  out_shape.back() /= 2;
  Tensor y(out_shape);
  std::vector<std::uint8_t> arg(y.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) maxout2_forward(x.row(r), y.row(r), arg);
  return finite(std::move(y), "maxout2");
}

Tensor maxout2_backward(const Tensor& x, const Tensor& dy) {
  if (x.cols() % 2 != 0 || dy.cols() * 2 != x.cols() || dy.rows() != x.rows()) {
    throw DimensionError("maxout2_backward: inconsistent shapes");
  }
  Tensor dx(x.shape());
  std::vector<std::uint8_t> arg(dy.cols());
  std::vector<double> scratch(dy.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    maxout2_forward(x.row(r), scratch, arg);
    maxout2_backward(dy.row(r), arg, dx.row(r));
  }
  return finite(std::move(dx), "maxout2_backward");
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b[i];
  return finite(std::move(y), "hadamard");
}

std::pair<Tensor, Tensor> hadamard_backward(const Tensor& a, const Tensor& b,
                                            const Tensor& dout) {
  require_same_shape(a, b, "hadamard_backward");
  require_same_shape(a, dout, "hadamard_backward");
  Tensor da = hadamard(dout, b);
  Tensor db = hadamard(dout, a);
  return {std::move(da), std::move(db)};
}

}  // namespace scst
