#ifndef AEFACE_MODEL_IO_HPP_
#define AEFACE_MODEL_IO_HPP_

#include <filesystem>

#include "aeface/nn.hpp"

namespace aeface {

// AEFV binary model format, little-endian, no padding:
//   magic "AEFV", version u32 = 1, input_dim u32, layer_count u32,
//   then per layer: out_dim u32, in_dim u32, activation u8
//   (0=Linear 1=ReLU 2=Sigmoid 3=Softmax), out*in f64 weights row-major,
//   out f64 biases. Round-trips are bitwise exact.
void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace aeface

#endif  // AEFACE_MODEL_IO_HPP_
