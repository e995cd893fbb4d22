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

#ifndef SCST_CHECKPOINT_H_
#define SCST_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "scst/param_store.h"

namespace scst {

// Binary checkpoint layout (all integers and floats little-endian):
//
//   magic "SCSTCKPT" | u32 version | u32 model kind tag
//   u32 n_config | u64 config[n_config]
//   u32 n_params | n_params parameter records
//   u32 n_moments | n_moments records (first moments, then second moments)
//   u64 adam step counter
//
// A record is: u32 name length | name bytes | u32 rank | u64 extents[rank] |
// f64 data[prod(extents)].
inline constexpr char kCheckpointMagic[8] = {'S', 'C', 'S', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::uint32_t model_kind = 0;
  std::vector<std::uint64_t> config;
};

std::string serialize_checkpoint(const CheckpointHeader& header, const ParamStore& store);
// Rebuilds a store (values, moments and step). Throws IoError on malformed
// or truncated input.
ParamStore parse_checkpoint(const std::string& bytes, CheckpointHeader* header);

void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ParamStore& store);
ParamStore load_checkpoint(const std::string& path, CheckpointHeader* header);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace scst

#endif  // SCST_CHECKPOINT_H_
