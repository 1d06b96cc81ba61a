// Copyright 2026 The Tripsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRIPSYNTH_CONTAINER_HPP_
#define TRIPSYNTH_CONTAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tripsynth/tensor.hpp"

// Length-prefixed binary container shared by dataset and checkpoint files:
//   magic(4) | u16 version | sections | "crc!" section
// where a section is u32 name_len | name | u64 payload_len | payload, all
// integers and doubles little-endian. The final section's payload is the
// crc32 of every byte before that section; readers verify it and report
// corruption with the byte offset where decoding failed.
namespace tripsynth::io {

struct Section {
  std::string name;
  std::vector<std::uint8_t> payload;
};

// crc32 (IEEE 802.3, reflected, init/xorout 0xFFFFFFFF) over len bytes.
std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

// Appends primitives little-endian regardless of host order.
class ByteWriter {
 public:
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(const void* p, std::size_t n);
  void str(const std::string& s);     // u32 length prefix + bytes
  void tensor(const Tensor& t);       // u32 rank, u64 dims, f64 data

  std::vector<std::uint8_t> take() { return std::move(buf_); }
  const std::vector<std::uint8_t>& data() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

// Bounds-checked little-endian reader; every overrun throws IntegrityError
// carrying the absolute file offset of the failed access.
class ByteReader {
 public:
  // base is the offset of data[0] within the containing file.
  ByteReader(const std::uint8_t* data, std::size_t len, std::size_t base = 0);

  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  Tensor tensor();
  void raw(void* out, std::size_t n);

  std::size_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return len_ - pos_; }
  bool done() const { return pos_ == len_; }

 private:
  void need(std::size_t n) const;

  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

// Serializes sections under the 4-byte magic, appends the crc section, and
// replaces path atomically (write temp, rename).
void write_container(const std::filesystem::path& path, const char magic[4],
                     std::uint16_t version,
                     const std::vector<Section>& sections);

struct Container {
  std::uint16_t version = 0;
  std::vector<Section> sections;

  // Throws IntegrityError when name is absent.
  const Section& find(const std::string& name) const;
};

// Verifies magic and crc, rejects version > max_version with
// FormatVersionError, and returns the payload sections (crc excluded).
Container read_container(const std::filesystem::path& path,
                         const char magic[4], std::uint16_t max_version);

}  // namespace tripsynth::io

#endif  // TRIPSYNTH_CONTAINER_HPP_
