#include "aeface/pretrain.hpp"

#include <string>

namespace aeface {
namespace {

Matrix gather_rows(const Matrix& data, const std::vector<int>& idx) {
  Matrix batch(static_cast<Eigen::Index>(idx.size()), data.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    batch.row(static_cast<Eigen::Index>(i)) = data.row(idx[i]);
  }
  return batch;
}

void require_autoencoder_shape(const Network& net) {
  if (net.layers.size() != 4 || net.output_dim() != net.input_dim) {
    throw ShapeError("network is not autoencoder-shaped (expected 4 layers "
                     "with output_dim == input_dim)");
  }
}

}  // namespace

void AutoencoderConfig::validate() const {
  if (input_dim < 1 || hidden1 < 1 || code_dim < 1) {
    throw ConfigError("autoencoder dims must be >= 1");
  }
  if (!(code_dim < hidden1 && hidden1 < input_dim)) {
    throw ConfigError("autoencoder requires code_dim < hidden1 < input_dim, got " +
                      std::to_string(input_dim) + "/" +
                      std::to_string(hidden1) + "/" +
                      std::to_string(code_dim));
  }
  train.validate();
}

Network build_autoencoder(const AutoencoderConfig& cfg, Rng& rng) {
  cfg.validate();
  Network net;
  net.input_dim = cfg.input_dim;
  net.layers.push_back(
      init_layer(cfg.input_dim, cfg.hidden1, Activation::ReLU, rng));
  net.layers.push_back(
      init_layer(cfg.hidden1, cfg.code_dim, Activation::ReLU, rng));
  net.layers.push_back(
      init_layer(cfg.code_dim, cfg.hidden1, Activation::ReLU, rng));
  net.layers.push_back(
      init_layer(cfg.hidden1, cfg.input_dim, Activation::Linear, rng));
  net.validate();
  return net;
}

std::vector<double> pretrain(Network& net, const Matrix& data,
                             const AutoencoderConfig& cfg) {
  require_autoencoder_shape(net);
  if (data.rows() == 0) throw DataError("pretrain: empty dataset");
  if (data.cols() != net.input_dim) {
    throw ShapeError("pretrain: data width " + std::to_string(data.cols()) +
                     " != input_dim " + std::to_string(net.input_dim));
  }

  return train_loop(
      net, static_cast<int>(data.rows()), cfg.train,
      [&data](const Network& n, const std::vector<int>& idx) {
        const Matrix batch = gather_rows(data, idx);
        const ForwardTrace trace = forward(n, batch);
        auto [loss, grad] = mse_loss(trace.output(), batch);
        return std::make_pair(loss, backward(n, trace, grad));
      });
}

Matrix encode(const Network& net, const Matrix& batch) {
  require_autoencoder_shape(net);
  Network encoder;
  encoder.input_dim = net.input_dim;
  encoder.layers.assign(net.layers.begin(), net.layers.begin() + 2);
  return forward(encoder, batch).output();
}

Matrix reconstruct(const Network& net, const Matrix& batch) {
  require_autoencoder_shape(net);
  return forward(net, batch).output();
}

}  // namespace aeface
