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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "clozeforge/optim.hpp"
#include "clozeforge/params.hpp"

namespace clozeforge {

inline constexpr std::string_view kCheckpointMagic = "CLOZEFORGE-CKPT-1";

// Binary layout, all integers and reals little-endian:
//
//   "CLOZEFORGE-CKPT-1\n"
//   u64 optimizer step
//   u64 metadata length, metadata bytes (UTF-8 JSON)
//   u64 entry count, then per entry:
//     u32 name length, name bytes
//     u8 trainable, u8 has_moments, u8 has_row_mask
//     u32 rank, u64 extents[rank]
//     f64 values[n]; if has_moments: f64 first[n], f64 second[n]
//     if has_row_mask: u8 mask[extents[0]]
struct Checkpoint {
  ParamStore params;
  std::uint64_t step = 0;
  std::map<std::string, Moments> moments;
  std::string metadata;
};

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const Adam* optimizer, std::string_view metadata);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace clozeforge
