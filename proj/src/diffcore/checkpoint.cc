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

#include "scst/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "scst/error.h"

namespace scst {

namespace {

template <typename T>
void put(std::string& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_record(std::string& out, const std::string& name, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.append(name);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.shape()) put<std::uint64_t>(out, e);
  for (double x : t.data()) put<double>(out, x);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::pair<std::string, Tensor> get_record() {
    const auto name_len = get<std::uint32_t>();
    std::string name = get_bytes(name_len);
    const auto rank = get<std::uint32_t>();
    if (rank == 0 || rank > 8) throw IoError("checkpoint: bad rank for " + name);
    Shape shape(rank);
    std::size_t count = 1;
    for (auto& e : shape) {
      e = static_cast<std::size_t>(get<std::uint64_t>());
      if (e == 0 || e > (1u << 28)) throw IoError("checkpoint: bad extent for " + name);
      count *= e;
    }
    need(count * sizeof(double));
    std::vector<double> data(count);
    for (double& x : data) x = get<double>();
    return {std::move(name), Tensor(std::move(shape), std::move(data))};
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint: truncated data");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const CheckpointHeader& header, const ParamStore& store) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, header.model_kind);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header.config.size()));
  for (std::uint64_t v : header.config) put<std::uint64_t>(out, v);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    put_record(out, store.param(i).name, store.param(i).value);
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(2 * store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    put_record(out, store.param(i).name, store.param(i).adam_m);
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    put_record(out, store.param(i).name, store.param(i).adam_v);
  }
  put<std::uint64_t>(out, store.step());
  return out;
}

ParamStore parse_checkpoint(const std::string& bytes, CheckpointHeader* header) {
  Reader in(bytes);
  if (in.get_bytes(sizeof(kCheckpointMagic)) !=
      std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw IoError("checkpoint: bad magic");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  CheckpointHeader h;
  h.model_kind = in.get<std::uint32_t>();
  const auto n_config = in.get<std::uint32_t>();
  if (n_config > 1024) throw IoError("checkpoint: implausible config length");
  for (std::uint32_t i = 0; i < n_config; ++i) h.config.push_back(in.get<std::uint64_t>());

  ParamStore store;
  const auto n_params = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_params; ++i) {
    auto [name, value] = in.get_record();
    store.add(name, std::move(value));
  }
  const auto n_moments = in.get<std::uint32_t>();
  if (n_moments != 2 * n_params) throw IoError("checkpoint: moment count mismatch");
  for (std::uint32_t i = 0; i < n_moments; ++i) {
    auto [name, moment] = in.get_record();
    Parameter& p = store.param(i % n_params);
    if (name != p.name || moment.shape() != p.value.shape()) {
      throw IoError("checkpoint: moment record does not match parameter " + p.name);
    }
    (i < n_params ? p.adam_m : p.adam_v) = std::move(moment);
  }
  store.set_step(in.get<std::uint64_t>());
  if (!in.at_end()) throw IoError("checkpoint: trailing bytes");
  if (header) *header = std::move(h);
  return store;
}

void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ParamStore& store) {
  write_file(path, serialize_checkpoint(header, store));
}

ParamStore load_checkpoint(const std::string& path, CheckpointHeader* header) {
  return parse_checkpoint(read_file(path), header);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace scst
