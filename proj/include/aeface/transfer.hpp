#ifndef AEFACE_TRANSFER_HPP_
#define AEFACE_TRANSFER_HPP_

#include "aeface/nn.hpp"

namespace aeface {

enum class InitMode {
  EncoderOnly,      // autoencoder layers 1-2 + new embed/classify layers
  FullAutoencoder,  // all 4 autoencoder layers + new embed/classify layers
  RandomBaseline,   // same topology as FullAutoencoder, fresh weights
};

struct ClassifierConfig {
  Eigen::Index embed_dim = 400;
  Eigen::Index num_classes = 1000;
  InitMode init_mode = InitMode::FullAutoencoder;
  Activation new_layer_activation = Activation::Sigmoid;
  // Reproduces the configuration where sigmoid is applied to every layer,
  // transferred ones included.
  bool force_sigmoid_all = false;
  TrainConfig train;

  ClassifierConfig() {
    train.max_epochs = 300;
    train.batch_size = 100;
    train.lr_schedule = LrSchedule::constant(0.002);
    train.momentum = 0.9;
  }

  void validate() const;
};

// Copies autoencoder layers per init_mode (bitwise, source untouched) and
// appends a Dense(embed_dim) layer plus a Dense(num_classes, Softmax)
// classification layer.
Network build_classifier(const Network& autoencoder,
                         const ClassifierConfig& cfg, Rng& rng);

// Supervised softmax cross-entropy training.
std::vector<double> finetune(Network& net, const Matrix& samples,
                             const std::vector<int>& labels,
                             const ClassifierConfig& cfg);

// Post-activation output of the penultimate (embedding) layer.
Matrix extract_embeddings(const Network& net, const Matrix& batch);

}  // namespace aeface

#endif  // AEFACE_TRANSFER_HPP_
