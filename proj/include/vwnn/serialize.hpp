#pragma once

// Binary model file, all integers and floats little-endian:
//
//   "VWNN"              4 bytes magic
//   version             u8  (= 1)
//   name length, name   u8, bytes
//   input dim           u32
//   layer count         u32
//   per layer:
//     kind              u8  (0 dense, 1 variable weight, 2 variable bias)
//     n_in, n_out, n_p  u32 x 3
//     act_a, act_b      u8 x 2   dense: activation, 0 | vw: f1, f2 | vb: 2 (linear), 0 (relu)
//     parameters        f64 blocks in for_each_block order, row-major

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vwnn/errors.hpp"
#include "vwnn/network.hpp"

namespace vwnn {

inline constexpr char kModelMagic[4] = {'V', 'W', 'N', 'N'};
inline constexpr std::uint8_t kModelVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& b) : buf_(b) {}

  std::size_t offset() const noexcept { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (buf_.size() - pos_ < n) throw FormatError(std::string("truncated model file while reading ") + what, pos_);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return buf_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool at_end() const noexcept { return pos_ == buf_.size(); }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_model(const Network& net) {
  detail::ByteWriter w;
  w.bytes(kModelMagic, 4);
  w.u8(kModelVersion);
  if (net.spec.name.size() > 255) throw ArgumentError("model name longer than 255 bytes");
  w.u8(static_cast<std::uint8_t>(net.spec.name.size()));
  w.bytes(net.spec.name.data(), net.spec.name.size());
  w.u32(static_cast<std::uint32_t>(net.spec.input_dim));
  w.u32(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& layer : net.layers) {
    const LayerDesc d = desc_of(layer);
    w.u8(static_cast<std::uint8_t>(d.kind));
    w.u32(static_cast<std::uint32_t>(d.n_in));
    w.u32(static_cast<std::uint32_t>(d.n_out));
    w.u32(static_cast<std::uint32_t>(d.n_p()));
    switch (d.kind) {
      case LayerKind::Dense:
        w.u8(static_cast<std::uint8_t>(d.activation));
        w.u8(0);
        break;
      case LayerKind::VarWeight:
        w.u8(static_cast<std::uint8_t>(d.f1));
        w.u8(static_cast<std::uint8_t>(d.activation));
        break;
      case LayerKind::VarBias:
        w.u8(static_cast<std::uint8_t>(VarBiasParams::kBiasActivation));
        w.u8(static_cast<std::uint8_t>(VarBiasParams::kOutActivation));
        break;
    }
    for_each_block(layer, [&](const Tensor& t) {
      for (double v : t.flat()) w.f64(v);
    });
  }
  return std::move(w.buffer());
}

/// Decodes a model image. Throws FormatError carrying the failing byte offset;
/// nothing is returned on failure.
inline Network decode_model(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  if (r.str(4, "magic") != std::string(kModelMagic, 4)) throw FormatError("bad magic bytes, not a VWNN model", 0);
  const std::size_t version_at = r.offset();
  const std::uint8_t version = r.u8("version");
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version), version_at);
  }
  Network net;
  const std::uint8_t name_len = r.u8("name length");
  net.spec.name = r.str(name_len, "name");
  net.spec.input_dim = r.u32("input dimension");
  const std::uint32_t count = r.u32("layer count");
  if (count == 0 || count > 1024) throw FormatError("implausible layer count " + std::to_string(count), r.offset() - 4);

  for (std::uint32_t l = 0; l < count; ++l) {
    const std::size_t layer_at = r.offset();
    const std::uint8_t kind_tag = r.u8("layer kind");
    if (kind_tag > 2) throw FormatError("unknown layer kind tag " + std::to_string(kind_tag), layer_at);
    LayerDesc d;
    d.kind = static_cast<LayerKind>(kind_tag);
    d.n_in = r.u32("n_in");
    d.n_out = r.u32("n_out");
    const std::uint32_t np = r.u32("n_p");
    const std::size_t act_at = r.offset();
    const auto act_a = activation_from_tag(r.u8("activation"));
    const auto act_b = activation_from_tag(r.u8("activation"));
    if (!act_a || !act_b) throw FormatError("unknown activation tag", act_at);
    if (d.n_in == 0 || d.n_out == 0 || d.n_in > 4096 || d.n_out > 4096 || np != d.n_p()) {
      throw FormatError("invalid layer dimensions", layer_at + 1);
    }
    switch (d.kind) {
      case LayerKind::Dense:
        d.activation = *act_a;
        break;
      case LayerKind::VarWeight:
        d.f1 = *act_a;
        d.activation = *act_b;
        if (d.f1 != Activation::Tanh && d.f1 != Activation::Linear) {
          throw FormatError("weight-prediction activation must be tanh or linear", act_at);
        }
        break;
      case LayerKind::VarBias:
        if (*act_a != VarBiasParams::kBiasActivation || *act_b != VarBiasParams::kOutActivation) {
          throw FormatError("variable-bias activations must be linear/relu", act_at);
        }
        d.activation = Activation::ReLU;
        break;
    }
    net.spec.layers.push_back(d);
    LayerParams params = zero_params(d);
    for_each_block(params, [&](Tensor& t) {
      for (double& v : t.flat()) v = r.f64("parameters");
    });
    net.layers.push_back(std::move(params));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last layer", r.offset());
  try {
    validate(net.spec);
  } catch (const std::exception& e) {
    throw FormatError(std::string("inconsistent network: ") + e.what(), 0);
  }
  return net;
}

inline void save(const Network& net, const std::string& path) {
  const auto bytes = encode_model(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Network load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace vwnn
