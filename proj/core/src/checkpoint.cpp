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

#include "clozeforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <utility>
#include <vector>

#include "clozeforge/errors.hpp"

namespace clozeforge {
namespace {

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

  template <typename T>
  void uint(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, sizeof(T));
  }

  void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void reals(std::span<const double> vs) {
    for (double v : vs) real(v);
  }
  void str(std::string_view s) {
    uint<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw DataError("truncated checkpoint: " + path_);
  }

  template <typename T>
  T uint() {
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::vector<double> reals(std::size_t n) {
    std::vector<double> out(n);
    for (double& v : out) v = real();
    return out;
  }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params, const Adam* optimizer,
                     std::string_view metadata) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + tmp.string());
    Writer w(out);
    w.bytes(kCheckpointMagic.data(), kCheckpointMagic.size());
    w.bytes("\n", 1);
    w.uint<std::uint64_t>(optimizer ? optimizer->step_count() : 0);
    w.uint<std::uint64_t>(metadata.size());
    w.bytes(metadata.data(), metadata.size());
    w.uint<std::uint64_t>(params.size());
    for (const auto& p : params) {
      const Moments* mo = nullptr;
      if (optimizer) {
        auto it = optimizer->moments().find(p->name);
        if (it != optimizer->moments().end() && it->second.first.size() == p->value.size()) mo = &it->second;
      }
      w.str(p->name);
      w.uint<std::uint8_t>(p->trainable ? 1 : 0);
      w.uint<std::uint8_t>(mo ? 1 : 0);
      w.uint<std::uint8_t>(p->row_mask.empty() ? 0 : 1);
      w.uint<std::uint32_t>(static_cast<std::uint32_t>(p->value.rank()));
      for (std::size_t d : p->value.shape()) w.uint<std::uint64_t>(d);
      w.reals(p->value.values());
      if (mo) {
        w.reals(mo->first);
        w.reals(mo->second);
      }
      if (!p->row_mask.empty()) w.bytes(p->row_mask.data(), p->row_mask.size());
    }
    if (!out) throw DataError("failed writing checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  Reader r(in, path.string());
  std::string magic = r.str(kCheckpointMagic.size() + 1);
  if (magic != std::string(kCheckpointMagic) + "\n") {
    throw DataError("not a clozeforge checkpoint (bad magic): " + path.string());
  }
  Checkpoint ck;
  ck.step = r.uint<std::uint64_t>();
  ck.metadata = r.str(r.uint<std::uint64_t>());
  const auto count = r.uint<std::uint64_t>();
  for (std::uint64_t e = 0; e < count; ++e) {
    std::string name = r.str(r.uint<std::uint32_t>());
    const bool trainable = r.uint<std::uint8_t>() != 0;
    const bool has_moments = r.uint<std::uint8_t>() != 0;
    const bool has_mask = r.uint<std::uint8_t>() != 0;
    const auto rank = r.uint<std::uint32_t>();
    if (rank == 0 || rank > 8) throw DataError("corrupt checkpoint entry '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.uint<std::uint64_t>());
    const std::size_t n = shape_size(shape);
    Parameter& p = ck.params.add(name, Tensor(shape, r.reals(n)), trainable);
    if (has_moments) {
      Moments mo;
      mo.first = r.reals(n);
      mo.second = r.reals(n);
      ck.moments.emplace(name, std::move(mo));
    }
    if (has_mask) {
      p.row_mask.resize(shape[0]);
      r.bytes(p.row_mask.data(), p.row_mask.size());
    }
  }
  return ck;
}

}  // namespace clozeforge
