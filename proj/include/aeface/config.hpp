#ifndef AEFACE_CONFIG_HPP_
#define AEFACE_CONFIG_HPP_

#include <filesystem>
#include <string>

#include "aeface/dataio.hpp"
#include "aeface/pretrain.hpp"
#include "aeface/transfer.hpp"
#include "aeface/tsne.hpp"

namespace aeface {

struct ProtocolConfig {
  int k = 10;
  int n_same = 3000;
  int n_diff = 3000;
};

// Batch-run configuration, parsed strictly from JSON: unknown keys are a
// ConfigError so typos cannot silently fall back to defaults.
struct RunConfig {
  std::uint64_t seed = 0;
  SynthSpec synth;
  AutoencoderConfig autoencoder;
  ClassifierConfig classifier;
  ProtocolConfig protocol;
  TsneConfig tsne;

  // Square image side implied by the autoencoder input width.
  Eigen::Index image_side() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace aeface

#endif  // AEFACE_CONFIG_HPP_
