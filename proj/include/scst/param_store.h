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

#ifndef SCST_PARAM_STORE_H_
#define SCST_PARAM_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scst/tensor.h"

namespace scst {

// One gradient tensor per parameter, index-aligned with a ParamStore.
// Used both as the store's own accumulator and as per-example scratch
// buffers that are reduced in a fixed order.
class GradSet {
 public:
  GradSet() = default;
  explicit GradSet(std::vector<Tensor> grads) : grads_(std::move(grads)) {}

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }

  void zero();
  void add(const GradSet& other);
  void scale(double s);
  double squared_norm() const;
  std::vector<double> flatten() const;

 private:
  std::vector<Tensor> grads_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor adam_m;
  Tensor adam_v;
};

// Named trainable tensors plus gradients and ADAM moments. Parameters keep
// their insertion order, which is also the checkpoint order.
class ParamStore {
 public:
  // Registers a parameter; moments start at zero. Duplicate names are a
  // UsageError.
  std::size_t add(const std::string& name, Tensor init);

  std::size_t size() const { return params_.size(); }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index(const std::string& name) const;

  const Parameter& param(std::size_t i) const { return params_[i]; }
  Parameter& param(std::size_t i) { return params_[i]; }
  Tensor& value(std::size_t i) { return params_[i].value; }
  const Tensor& value(std::size_t i) const { return params_[i].value; }
  Tensor& value(const std::string& name) { return params_[index(name)].value; }
  const Tensor& value(const std::string& name) const { return params_[index(name)].value; }

  GradSet& grads() { return grads_; }
  const GradSet& grads() const { return grads_; }
  // A fresh zeroed gradient buffer with this store's layout.
  GradSet make_grad_buffer() const;

  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  // FNV-1a over names and raw parameter bytes (not moments).
  std::uint64_t value_hash() const;

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
  GradSet grads_;
  std::uint64_t step_ = 0;
};

}  // namespace scst

#endif  // SCST_PARAM_STORE_H_
