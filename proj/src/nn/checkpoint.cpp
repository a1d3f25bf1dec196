#include "othello/nn/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "othello/wthor.hpp"

namespace othello::nn {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  template <typename Derived>
  void tensor(const Eigen::DenseBase<Derived>& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) u32(std::bit_cast<std::uint32_t>(t.derived().data()[i]));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorCode::TruncatedFile, "model file cut short");
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  template <typename T>
  void tensor(T& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = std::bit_cast<float>(u32());
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> b) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), b.data(), static_cast<uInt>(b.size())));
}

std::uint32_t rate_ppm(double rate) { return static_cast<std::uint32_t>(std::lround(rate * 1e6)); }

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& m) {
  validate(m.net.spec);
  Writer w;
  for (char ch : {'O', 'N', 'N', '1'}) w.u8(static_cast<std::uint8_t>(ch));
  w.u16(kModelVersion);
  w.u8(static_cast<std::uint8_t>(m.encoding));
  w.u32(static_cast<std::uint32_t>(m.net.spec.layers.size()));
  for (const LayerSpec& l : m.net.spec.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(static_cast<std::uint32_t>(l.in));
    w.u32(l.kind == LayerKind::Dropout ? rate_ppm(l.rate) : static_cast<std::uint32_t>(l.out));
  }
  for (const LayerParams<float>& p : m.net.layers) {
    w.tensor(p.weight);
    w.tensor(p.bias);
    w.tensor(p.scale);
    w.tensor(p.running_mean);
    w.tensor(p.running_var);
  }
  w.u32(crc_of(w.bytes));
  return std::move(w.bytes);
}

Model deserialize_model(std::span<const std::uint8_t> bytes, const std::optional<NetworkSpec>& expected) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ONN1", 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not an ONN1 model");
  }
  if (bytes.size() < 4 + 2 + 1 + 4 + 4) throw Error(ErrorCode::TruncatedFile, "model header cut short");
  Reader r(bytes.first(bytes.size() - 4));
  r.u32();
  const std::uint16_t version = r.u16();
  if (version != kModelVersion) throw Error(ErrorCode::VersionMismatch, "model version " + std::to_string(version));
  Reader trailer(bytes.last(4));
  if (crc_of(bytes.first(bytes.size() - 4)) != trailer.u32()) {
    throw Error(ErrorCode::ChecksumMismatch, "model checksum does not match");
  }
  Model m;
  const std::uint8_t enc = r.u8();
  if (enc > 2) throw Error(ErrorCode::InvalidArgument, "unknown encoding tag");
  m.encoding = static_cast<dataset::Encoding>(enc);
  const std::uint32_t count = r.u32();
  r.need(static_cast<std::size_t>(count) * 9);
  NetworkSpec spec;
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec l;
    const std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 7) throw Error(ErrorCode::ShapeMismatch, "unknown layer kind " + std::to_string(kind));
    l.kind = static_cast<LayerKind>(kind);
    l.in = static_cast<int>(r.u32());
    const std::uint32_t second = r.u32();
    if (l.kind == LayerKind::Dropout) {
      l.rate = second / 1e6;
    } else {
      l.out = static_cast<int>(second);
    }
    spec.layers.push_back(l);
  }
  if (expected) {
    NetworkSpec want = *expected;
    for (LayerSpec& l : want.layers) {
      if (l.kind == LayerKind::Dropout) l.rate = rate_ppm(l.rate) / 1e6;
    }
    if (!(want == spec)) {
      throw Error(ErrorCode::ShapeMismatch, "model is " + describe(spec) + ", expected " + describe(*expected));
    }
  }
  validate(spec);
  m.net = he_init<float>(spec, 0);
  for (LayerParams<float>& p : m.net.layers) {
    r.tensor(p.weight);
    r.tensor(p.bias);
    r.tensor(p.scale);
    r.tensor(p.running_mean);
    r.tensor(p.running_var);
  }
  if (r.pos() != bytes.size() - 4) throw Error(ErrorCode::ShapeMismatch, "model tensors do not match its spec");
  return m;
}

void save_model(const Model& m, const std::filesystem::path& path) {
  const auto bytes = serialize_model(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Model load_model(const std::filesystem::path& path, const std::optional<NetworkSpec>& expected) {
  return deserialize_model(wthor::read_file(path), expected);
}

}  // namespace othello::nn
