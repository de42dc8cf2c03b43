#ifndef AEFACE_NN_HPP_
#define AEFACE_NN_HPP_

#include <cstdint>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "aeface/matrix.hpp"

namespace aeface {

enum class Activation : std::uint8_t {
  Linear = 0,
  ReLU = 1,
  Sigmoid = 2,
  Softmax = 3,
};

const char* activation_name(Activation a);

struct DenseLayer {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim
  Activation activation = Activation::Linear;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

struct Network {
  Eigen::Index input_dim = 0;
  std::vector<DenseLayer> layers;

  Eigen::Index output_dim() const {
    return layers.empty() ? input_dim : layers.back().out_dim();
  }
  // Checks the dimension chain and that Softmax appears only on the
  // final layer. Throws ConfigError.
  void validate() const;
};

struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> pre;  // pre-activations, one per layer
  std::vector<Matrix> act;  // post-activations, one per layer
  const Matrix& output() const { return act.back(); }
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;
};

struct LrSchedule {
  enum class Kind { Constant, LogDecay, LinearDecay };
  Kind kind = Kind::Constant;
  double lr = 0.0;               // Constant
  double start = 0.0;            // LogDecay / LinearDecay
  double end = 0.0;              // LogDecay
  double decay_per_epoch = 0.0;  // LinearDecay

  static LrSchedule constant(double lr);
  static LrSchedule log_decay(double start, double end);
  static LrSchedule linear_decay(double start, double decay_per_epoch);
};

struct TrainConfig {
  int max_epochs = 500;
  int batch_size = 100;
  LrSchedule lr_schedule = LrSchedule::log_decay(1e-3, 1e-9);
  double momentum = 0.9;
  int patience = 10;
  double min_delta = 1e-5;  // relative improvement threshold
  std::uint64_t seed = 0;

  void validate() const;
};

struct OptimizerState {
  std::vector<Matrix> vel_weights;
  std::vector<Vector> vel_bias;
  double momentum = 0.9;

  static OptimizerState zeros_like(const Network& net, double momentum);
};

DenseLayer init_layer(Eigen::Index in_dim, Eigen::Index out_dim,
                      Activation activation, Rng& rng);

Matrix apply_activation(Activation tag, const Matrix& pre);

ForwardTrace forward(const Network& net, const Matrix& batch);

// loss = mean over all N*D entries of squared error; grad matches.
std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target);

// probs are softmax outputs; the returned gradient is with respect to the
// logits (the usual fused softmax + cross-entropy form).
std::pair<double, Matrix> cross_entropy_loss(const Matrix& probs,
                                             const std::vector<int>& labels);

// output_grad is with respect to the final activation, except when the last
// layer is Softmax, in which case it must already be the fused logits
// gradient as returned by cross_entropy_loss.
Gradients backward(const Network& net, const ForwardTrace& trace,
                   const Matrix& output_grad);

// Classical momentum: v <- momentum*v - lr*g; param <- param + v.
void sgd_momentum_step(Network& net, const Gradients& grads,
                       OptimizerState& state, double lr);

double lr_at(const LrSchedule& schedule, int epoch, int max_epochs);

// Target for gradient checking: a reconstruction/regression target matrix
// (MSE) or class labels (softmax cross-entropy).
using LossTarget = std::variant<Matrix, std::vector<int>>;

// Central finite differences over every parameter; returns the maximum
// relative error |analytic - numeric| / max(|a|, |n|, 1e-8).
double gradient_check(const Network& net, const Matrix& batch,
                      const LossTarget& target, double eps = 1e-5);

// One minibatch given row indices into the caller's dataset; returns the
// batch loss and parameter gradients.
using BatchStep =
    std::function<std::pair<double, Gradients>(const Network&, const std::vector<int>&)>;

// Shared SGD loop: seeded shuffle each epoch, momentum updates, per-epoch
// mean loss, early stop once the loss fails to improve by min_delta
// (relative) for `patience` consecutive epochs.
std::vector<double> train_loop(Network& net, int num_samples,
                               const TrainConfig& cfg, const BatchStep& step);

}  // namespace aeface

#endif  // AEFACE_NN_HPP_
