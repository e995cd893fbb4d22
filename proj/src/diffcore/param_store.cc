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

#include "scst/param_store.h"

#include <cstring>

#include "scst/error.h"

namespace scst {

void GradSet::zero() {
  for (Tensor& g : grads_) g.fill(0.0);
}

void GradSet::add(const GradSet& other) {
  if (other.size() != size()) throw DimensionError("GradSet::add: layout mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].data();
    auto src = other[i].data();
    if (dst.size() != src.size()) throw DimensionError("GradSet::add: shape mismatch");
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void GradSet::scale(double s) {
  for (Tensor& g : grads_) {
    for (double& x : g.data()) x *= s;
  }
}

double GradSet::squared_norm() const {
  double acc = 0.0;
  for (const Tensor& g : grads_) {
    for (double x : g.data()) acc += x * x;
  }
  return acc;
}

std::vector<double> GradSet::flatten() const {
  std::vector<double> out;
  for (const Tensor& g : grads_) out.insert(out.end(), g.data().begin(), g.data().end());
  return out;
}

std::size_t ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw UsageError("duplicate parameter name: " + name);
  init.check_finite("initial value of " + name);
  const Shape shape = init.shape();
  std::vector<Tensor> grads;
  grads.reserve(params_.size() + 1);
  for (std::size_t i = 0; i < grads_.size(); ++i) grads.push_back(std::move(grads_[i]));
  grads.emplace_back(shape);
  grads_ = GradSet(std::move(grads));
  params_.push_back({name, std::move(init), Tensor(shape), Tensor(shape)});
  index_[name] = params_.size() - 1;
  return params_.size() - 1;
}

std::size_t ParamStore::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw UsageError("unknown parameter: " + name);
  return it->second;
}

GradSet ParamStore::make_grad_buffer() const {
  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (const Parameter& p : params_) grads.emplace_back(p.value.shape());
  return GradSet(std::move(grads));
}

std::uint64_t ParamStore::value_hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Parameter& p : params_) {
    mix(p.name.data(), p.name.size());
    mix(p.value.data().data(), p.value.size() * sizeof(double));
  }
  return h;
}

}  // namespace scst
