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

// The fixed set of differentiable primitives used by the captioning models.
//
// Two layers are provided. The tensor layer (matmul, sigmoid, ...) returns
// fresh tensors and validates shapes and finiteness; it is what the unit
// tests and gradient checks exercise. The span layer (gemv_acc, ...) works
// in place on caller-owned buffers and is what the recurrent models call in
// their inner loops. Tensor ops are thin wrappers over the span kernels, so
// both layers share one arithmetic path.

#ifndef SCST_OPS_H_
#define SCST_OPS_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "scst/tensor.h"

namespace scst {

// ---- span kernels ---------------------------------------------------------

// y += W x, W is rows x cols.
void gemv_acc(const Tensor& w, std::span<const double> x, std::span<double> y);
// dx += W^T dy.
void gemv_t_acc(const Tensor& w, std::span<const double> dy, std::span<double> dx);
// dW += dy x^T.
void outer_acc(Tensor& dw, std::span<const double> dy, std::span<const double> x);

void sigmoid_inplace(std::span<double> v);
void tanh_inplace(std::span<double> v);
// Numerically stable softmax of `v` in place.
void softmax_inplace(std::span<double> v);
// Given y = softmax(x) and dy, returns dx in `dy`'s place.
void softmax_backward_inplace(std::span<const double> y, std::span<double> dy);
// out[j] = max(in[2j], in[2j+1]); arg[j] records 0 or 1 (first wins ties).
void maxout2_forward(std::span<const double> in, std::span<double> out,
                     std::span<std::uint8_t> arg);
void maxout2_backward(std::span<const double> dout,
                      std::span<const std::uint8_t> arg, std::span<double> din);

double log_sum_exp(std::span<const double> v);
double entropy(std::span<const double> p);

// ---- tensor layer ---------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
struct MatmulGrad {
  Tensor da;
  Tensor db;
};
MatmulGrad matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dout);

Tensor sigmoid(const Tensor& x);
// Backward ops take the forward output y, which is what the LSTM caches.
Tensor sigmoid_backward(const Tensor& y, const Tensor& dy);
Tensor tanh(const Tensor& x);
Tensor tanh_backward(const Tensor& y, const Tensor& dy);
// Softmax over the last axis.
Tensor softmax(const Tensor& x);
Tensor softmax_backward(const Tensor& y, const Tensor& dy);

// Pairwise max over the last axis, halving it. Odd extents are a
// DimensionError.
Tensor maxout2(const Tensor& x);
Tensor maxout2_backward(const Tensor& x, const Tensor& dy);

Tensor hadamard(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> hadamard_backward(const Tensor& a, const Tensor& b,
                                            const Tensor& dout);

}  // namespace scst

#endif  // SCST_OPS_H_
