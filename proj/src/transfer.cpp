#include "aeface/transfer.hpp"

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

}  // namespace

void ClassifierConfig::validate() const {
  if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  train.validate();
}

Network build_classifier(const Network& autoencoder,
                         const ClassifierConfig& cfg, Rng& rng) {
  cfg.validate();
  if (autoencoder.layers.size() != 4) {
    throw ConfigError("build_classifier expects a 4-layer autoencoder, got " +
                      std::to_string(autoencoder.layers.size()) + " layers");
  }

  const std::size_t transferred =
      cfg.init_mode == InitMode::EncoderOnly ? 2 : 4;
  const Eigen::Index trunk_out = autoencoder.layers[transferred - 1].out_dim();

  // New layers are drawn first so that RandomBaseline and FullAutoencoder
  // share them bitwise under the same seed.
  DenseLayer embed_layer =
      init_layer(trunk_out, cfg.embed_dim, cfg.new_layer_activation, rng);
  DenseLayer class_layer =
      init_layer(cfg.embed_dim, cfg.num_classes, Activation::Softmax, rng);

  Network net;
  net.input_dim = autoencoder.input_dim;
  if (cfg.init_mode == InitMode::RandomBaseline) {
    for (const DenseLayer& src : autoencoder.layers) {
      net.layers.push_back(
          init_layer(src.in_dim(), src.out_dim(), src.activation, rng));
    }
  } else {
    net.layers.assign(autoencoder.layers.begin(),
                      autoencoder.layers.begin() +
                          static_cast<std::ptrdiff_t>(transferred));
  }
  if (cfg.force_sigmoid_all) {
    for (DenseLayer& layer : net.layers) layer.activation = Activation::Sigmoid;
  }
  net.layers.push_back(std::move(embed_layer));
  net.layers.push_back(std::move(class_layer));
  net.validate();
  return net;
}

std::vector<double> finetune(Network& net, const Matrix& samples,
                             const std::vector<int>& labels,
                             const ClassifierConfig& cfg) {
  if (samples.cols() != net.input_dim) {
    throw ShapeError("finetune: data width " + std::to_string(samples.cols()) +
                     " != input_dim " + std::to_string(net.input_dim));
  }
  if (static_cast<Eigen::Index>(labels.size()) != samples.rows()) {
    throw DataError("finetune: label count does not match sample count");
  }
  for (int label : labels) {
    if (label < 0 || label >= cfg.num_classes) {
      throw DataError("finetune: label " + std::to_string(label) +
                      " out of range [0, " + std::to_string(cfg.num_classes) +
                      ")");
    }
  }

  return train_loop(
      net, static_cast<int>(samples.rows()), cfg.train,
      [&samples, &labels](const Network& n, const std::vector<int>& idx) {
        const Matrix batch = gather_rows(samples, idx);
        std::vector<int> batch_labels(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
          batch_labels[i] = labels[static_cast<std::size_t>(idx[i])];
        }
        const ForwardTrace trace = forward(n, batch);
        auto [loss, grad] = cross_entropy_loss(trace.output(), batch_labels);
        return std::make_pair(loss, backward(n, trace, grad));
      });
}

Matrix extract_embeddings(const Network& net, const Matrix& batch) {
  if (net.layers.size() < 2 ||
      net.layers.back().activation != Activation::Softmax) {
    throw ShapeError(
        "extract_embeddings expects a classifier ending in a softmax layer");
  }
  Network trunk;
  trunk.input_dim = net.input_dim;
  trunk.layers.assign(net.layers.begin(), net.layers.end() - 1);
  return forward(trunk, batch).output();
}

}  // namespace aeface
