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

#include "tripsynth/container.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "tripsynth/error.hpp"

namespace tripsynth::io {
namespace {

constexpr const char kCrcSection[] = "crc!";

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    t[i] = c;
  }
  return t;
}

const std::array<std::uint32_t, 256> kCrcTable = make_crc_table();

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    c = kCrcTable[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

void ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v & 0xFF));
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void ByteWriter::f64(double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  u64(bits);
}

void ByteWriter::bytes(const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  buf_.insert(buf_.end(), b, b + n);
}

void ByteWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

void ByteWriter::tensor(const Tensor& t) {
  u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape) u64(d);
  for (double x : t.data) f64(x);
}

ByteReader::ByteReader(const std::uint8_t* data, std::size_t len,
                       std::size_t base)
    : data_(data), len_(len), base_(base) {}

void ByteReader::need(std::size_t n) const {
  if (len_ - pos_ < n) {
    throw IntegrityError("truncated container", base_ + pos_);
  }
}

std::uint16_t ByteReader::u16() {
  need(2);
  const std::uint16_t v = static_cast<std::uint16_t>(
      data_[pos_] | (static_cast<std::uint16_t>(data_[pos_ + 1]) << 8));
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  }
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  }
  pos_ += 8;
  return v;
}

double ByteReader::f64() {
  const std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
  pos_ += n;
  return s;
}

Tensor ByteReader::tensor() {
  const std::size_t at = offset();
  const std::uint32_t rank = u32();
  if (rank < 1 || rank > 3) {
    throw IntegrityError("tensor rank " + std::to_string(rank) +
                             " out of range",
                         at);
  }
  std::vector<std::size_t> shape;
  std::size_t n = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint64_t d = u64();
    if (d == 0 || d > (1u << 28) || n > (1u << 28) / d) {
      throw IntegrityError("tensor dimension out of range", at);
    }
    shape.push_back(static_cast<std::size_t>(d));
    n *= static_cast<std::size_t>(d);
  }
  Tensor t(shape);
  for (std::size_t i = 0; i < n; ++i) t.data[i] = f64();
  return t;
}

void ByteReader::raw(void* out, std::size_t n) {
  need(n);
  std::memcpy(out, data_ + pos_, n);
  pos_ += n;
}

void write_container(const std::filesystem::path& path, const char magic[4],
                     std::uint16_t version,
                     const std::vector<Section>& sections) {
  ByteWriter w;
  w.bytes(magic, 4);
  w.u16(version);
  for (const Section& s : sections) {
    w.str(s.name);
    w.u64(s.payload.size());
    w.bytes(s.payload.data(), s.payload.size());
  }
  const std::uint32_t crc = crc32(w.data().data(), w.data().size());
  w.str(kCrcSection);
  w.u64(4);
  w.u32(crc);

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(w.data().data()),
            static_cast<std::streamsize>(w.data().size()));
    f.flush();
    if (!f) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot move " + tmp.string() + " into place: " +
                  ec.message());
  }
}

const Section& Container::find(const std::string& name) const {
  for (const Section& s : sections) {
    if (s.name == name) return s;
  }
  throw IntegrityError("missing section " + name, 0);
}

Container read_container(const std::filesystem::path& path,
                         const char magic[4], std::uint16_t max_version) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());

  ByteReader r(buf.data(), buf.size());
  char got[4];
  r.raw(got, 4);
  if (std::memcmp(got, magic, 4) != 0) {
    throw IntegrityError("bad magic", 0);
  }
  Container c;
  c.version = r.u16();
  if (c.version > max_version) {
    throw FormatVersionError("container version " + std::to_string(c.version) +
                             " is newer than supported version " +
                             std::to_string(max_version));
  }

  bool crc_seen = false;
  while (!r.done()) {
    const std::size_t sec_at = r.offset();
    Section s;
    s.name = r.str();
    const std::uint64_t len = r.u64();
    if (len > r.remaining()) {
      throw IntegrityError("section " + s.name + " overruns the file",
                           r.offset());
    }
    if (s.name == kCrcSection) {
      if (len != 4) throw IntegrityError("crc section must be 4 bytes", sec_at);
      const std::uint32_t stored = r.u32();
      const std::uint32_t actual = crc32(buf.data(), sec_at);
      if (stored != actual) throw IntegrityError("crc mismatch", sec_at);
      crc_seen = true;
      if (!r.done()) {
        throw IntegrityError("trailing bytes after crc section", r.offset());
      }
      break;
    }
    s.payload.resize(len);
    if (len > 0) r.raw(s.payload.data(), len);
    c.sections.push_back(std::move(s));
  }
  if (!crc_seen) {
    throw IntegrityError("missing crc section", buf.size());
  }
  return c;
}

}  // namespace tripsynth::io
