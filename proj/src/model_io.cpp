#include "aeface/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace aeface {

static_assert(std::endian::native == std::endian::little,
              "AEFV serialization assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'E', 'F', 'V'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw ModelError(std::string("truncated model file reading ") + what);
  }
  return v;
}

}  // namespace

void save_model(const Network& net, const std::filesystem::path& path) {
  net.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(net.input_dim));
  write_u32(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const DenseLayer& layer : net.layers) {
    write_u32(out, static_cast<std::uint32_t>(layer.out_dim()));
    write_u32(out, static_cast<std::uint32_t>(layer.in_dim()));
    const auto code = static_cast<std::uint8_t>(layer.activation);
    out.write(reinterpret_cast<const char*>(&code), 1);
    // Matrix storage is row-major, so the raw block is already in
    // serialization order.
    out.write(reinterpret_cast<const char*>(layer.weights.data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           layer.weights.size()));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(sizeof(double) *
                                           layer.bias.size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  char magic[4] = {};
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ModelError(path.string() + ": bad magic, not an AEFV model");
  }
  const std::uint32_t version = read_u32(in, "version");
  if (version != kVersion) {
    throw ModelError(path.string() + ": unsupported format version " +
                     std::to_string(version));
  }

  Network net;
  net.input_dim = static_cast<Eigen::Index>(read_u32(in, "input_dim"));
  const std::uint32_t layer_count = read_u32(in, "layer_count");
  net.layers.reserve(layer_count);
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::uint32_t out_dim = read_u32(in, "out_dim");
    const std::uint32_t in_dim = read_u32(in, "in_dim");
    std::uint8_t code = 0;
    if (!in.read(reinterpret_cast<char*>(&code), 1)) {
      throw ModelError("truncated model file reading activation");
    }
    if (code > 3) {
      throw ModelError("unknown activation code " + std::to_string(code));
    }
    DenseLayer layer;
    layer.activation = static_cast<Activation>(code);
    layer.weights.resize(out_dim, in_dim);
    layer.bias.resize(out_dim);
    if (!in.read(reinterpret_cast<char*>(layer.weights.data()),
                 static_cast<std::streamsize>(sizeof(double) *
                                              layer.weights.size())) ||
        !in.read(reinterpret_cast<char*>(layer.bias.data()),
                 static_cast<std::streamsize>(sizeof(double) *
                                              layer.bias.size()))) {
      throw ModelError("truncated model file in layer " + std::to_string(l));
    }
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

}  // namespace aeface
