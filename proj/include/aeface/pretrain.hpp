#ifndef AEFACE_PRETRAIN_HPP_
#define AEFACE_PRETRAIN_HPP_

#include "aeface/nn.hpp"

namespace aeface {

struct AutoencoderConfig {
  Eigen::Index input_dim = 112 * 112;
  Eigen::Index hidden1 = 800;
  Eigen::Index code_dim = 300;
  TrainConfig train;

  AutoencoderConfig() {
    train.max_epochs = 500;
    train.batch_size = 100;
    train.lr_schedule = LrSchedule::log_decay(1e-3, 1e-9);
    train.momentum = 0.9;
  }

  void validate() const;
};

// Symmetric autoencoder in -> hidden1 -> code -> hidden1 -> in with
// ReLU hidden layers and a linear output.
Network build_autoencoder(const AutoencoderConfig& cfg, Rng& rng);

// Unsupervised reconstruction training (target == input).
std::vector<double> pretrain(Network& net, const Matrix& data,
                             const AutoencoderConfig& cfg);

// Post-activation output of the bottleneck layer (layer 2 of 4).
Matrix encode(const Network& net, const Matrix& batch);

// Full forward pass: decode(encode(x)).
Matrix reconstruct(const Network& net, const Matrix& batch);

}  // namespace aeface

#endif  // AEFACE_PRETRAIN_HPP_
