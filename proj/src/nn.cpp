#include "aeface/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace aeface {
namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Derivative of the activation with respect to its pre-activation.
// Softmax is handled as a fused case in backward() and never reaches here.
Matrix activation_grad(Activation tag, const Matrix& pre, const Matrix& act) {
  switch (tag) {
    case Activation::Linear:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::ReLU:
      // Derivative at exactly 0 is defined as 0.
      return (pre.array() > 0.0).cast<double>();
    case Activation::Sigmoid:
      return (act.array() * (1.0 - act.array())).matrix();
    case Activation::Softmax:
      throw ConfigError(
          "softmax derivative is fused with cross-entropy; "
          "plain backprop through softmax is not supported");
  }
  throw ConfigError("unknown activation");
}

double evaluate_loss(const Network& net, const Matrix& batch,
                     const LossTarget& target) {
  const ForwardTrace trace = forward(net, batch);
  if (const auto* mse_target = std::get_if<Matrix>(&target)) {
    return mse_loss(trace.output(), *mse_target).first;
  }
  return cross_entropy_loss(trace.output(), std::get<std::vector<int>>(target))
      .first;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

void Network::validate() const {
  if (input_dim < 1) throw ConfigError("network input_dim must be >= 1");
  Eigen::Index prev = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& layer = layers[i];
    if (layer.weights.cols() != prev) {
      throw ConfigError("layer " + std::to_string(i) + " expects input dim " +
                        std::to_string(layer.weights.cols()) + " but gets " +
                        std::to_string(prev));
    }
    if (layer.bias.size() != layer.weights.rows()) {
      throw ConfigError("layer " + std::to_string(i) +
                        " bias size does not match out_dim");
    }
    if (layer.activation == Activation::Softmax && i + 1 != layers.size()) {
      throw ConfigError("softmax is only permitted on the final layer");
    }
    prev = layer.out_dim();
  }
}

LrSchedule LrSchedule::constant(double lr) {
  LrSchedule s;
  s.kind = Kind::Constant;
  s.lr = lr;
  return s;
}

LrSchedule LrSchedule::log_decay(double start, double end) {
  if (!(start > end && end > 0.0)) {
    throw ConfigError("log decay requires start > end > 0");
  }
  LrSchedule s;
  s.kind = Kind::LogDecay;
  s.start = start;
  s.end = end;
  return s;
}

LrSchedule LrSchedule::linear_decay(double start, double decay_per_epoch) {
  LrSchedule s;
  s.kind = Kind::LinearDecay;
  s.start = start;
  s.decay_per_epoch = decay_per_epoch;
  return s;
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
}

OptimizerState OptimizerState::zeros_like(const Network& net, double momentum) {
  OptimizerState state;
  state.momentum = momentum;
  for (const DenseLayer& layer : net.layers) {
    state.vel_weights.emplace_back(
        Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    state.vel_bias.emplace_back(Vector::Zero(layer.bias.size()));
  }
  return state;
}

DenseLayer init_layer(Eigen::Index in_dim, Eigen::Index out_dim,
                      Activation activation, Rng& rng) {
  if (in_dim < 1 || out_dim < 1) {
    throw ConfigError("init_layer: dimensions must be >= 1");
  }
  DenseLayer layer;
  layer.weights.resize(out_dim, in_dim);
  const double bound =
      std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  // Row-major fill order so a fixed seed pins the exact bytes.
  for (Eigen::Index i = 0; i < out_dim; ++i) {
    for (Eigen::Index j = 0; j < in_dim; ++j) {
      layer.weights(i, j) = rng.uniform(-bound, bound);
    }
  }
  layer.bias = Vector::Zero(out_dim);
  layer.activation = activation;
  return layer;
}

Matrix apply_activation(Activation tag, const Matrix& pre) {
  switch (tag) {
    case Activation::Linear:
      return pre;
    case Activation::ReLU:
      return pre.cwiseMax(0.0);
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
    case Activation::Softmax: {
      require_finite(pre, "softmax input");
      Matrix out(pre.rows(), pre.cols());
      for (Eigen::Index i = 0; i < pre.rows(); ++i) {
        const Eigen::ArrayXd shifted =
            pre.row(i).array() - pre.row(i).maxCoeff();
        const Eigen::ArrayXd e = shifted.exp();
        out.row(i) = (e / e.sum()).matrix().transpose();
      }
      return out;
    }
  }
  throw ConfigError("unknown activation");
}

ForwardTrace forward(const Network& net, const Matrix& batch) {
  if (batch.cols() != net.input_dim) {
    throw ShapeError("forward: batch is " + shape_of(batch) +
                     " but network input_dim is " +
                     std::to_string(net.input_dim));
  }
  ForwardTrace trace;
  trace.input = batch;
  trace.pre.reserve(net.layers.size());
  trace.act.reserve(net.layers.size());
  const Matrix* current = &trace.input;
  for (const DenseLayer& layer : net.layers) {
    Matrix pre = matmul(*current, transposed(layer.weights));
    pre.rowwise() += layer.bias.transpose();
    trace.pre.push_back(std::move(pre));
    trace.act.push_back(apply_activation(layer.activation, trace.pre.back()));
    current = &trace.act.back();
  }
  return trace;
}

std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("mse_loss: shapes differ, " + shape_of(pred) + " vs " +
                     shape_of(target));
  }
  const double n = static_cast<double>(pred.size());
  const Matrix diff = pred - target;
  const double loss = diff.squaredNorm() / n;
  return {loss, (2.0 / n) * diff};
}

std::pair<double, Matrix> cross_entropy_loss(const Matrix& probs,
                                             const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows()) {
    throw ShapeError("cross_entropy_loss: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(probs.rows()) + " rows");
  }
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double row_sum = probs.row(i).sum();
    if (std::abs(row_sum - 1.0) > 1e-9) {
      throw DataError("cross_entropy_loss: row " + std::to_string(i) +
                      " does not sum to 1 (got " + std::to_string(row_sum) +
                      "); pass softmax outputs");
    }
  }
  const double n = static_cast<double>(probs.rows());
  double loss = 0.0;
  Matrix grad = probs;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= probs.cols()) {
      throw DataError("cross_entropy_loss: label " + std::to_string(label) +
                      " out of range [0, " + std::to_string(probs.cols()) +
                      ")");
    }
    loss -= std::log(probs(i, label));
    grad(i, label) -= 1.0;
  }
  return {loss / n, grad / n};
}

Gradients backward(const Network& net, const ForwardTrace& trace,
                   const Matrix& output_grad) {
  const Matrix& out = trace.output();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw ShapeError("backward: output_grad is " + shape_of(output_grad) +
                     " but output is " + shape_of(out));
  }
  const auto n_layers = static_cast<std::ptrdiff_t>(net.layers.size());
  Gradients grads;
  grads.weights.resize(net.layers.size());
  grads.bias.resize(net.layers.size());

  Matrix delta;  // gradient with respect to the current layer's pre-activation
  const Activation last_act = net.layers.back().activation;
  if (last_act == Activation::Softmax) {
    delta = output_grad;  // fused logits gradient
  } else {
    delta = output_grad.cwiseProduct(
        activation_grad(last_act, trace.pre.back(), trace.act.back()));
  }

  for (std::ptrdiff_t l = n_layers - 1; l >= 0; --l) {
    const Matrix& input_act = (l == 0) ? trace.input : trace.act[l - 1];
    grads.weights[l] = matmul(transposed(delta), input_act);
    grads.bias[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      const Matrix act_grad = matmul(delta, net.layers[l].weights);
      delta = act_grad.cwiseProduct(activation_grad(
          net.layers[l - 1].activation, trace.pre[l - 1], trace.act[l - 1]));
    }
  }
  return grads;
}

void sgd_momentum_step(Network& net, const Gradients& grads,
                       OptimizerState& state, double lr) {
  if (grads.weights.size() != net.layers.size() ||
      state.vel_weights.size() != net.layers.size()) {
    throw ShapeError("sgd_momentum_step: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    require_finite(grads.weights[l], "sgd gradient");
    require_finite(grads.bias[l], "sgd bias gradient");
    state.vel_weights[l] =
        state.momentum * state.vel_weights[l] - lr * grads.weights[l];
    state.vel_bias[l] = state.momentum * state.vel_bias[l] - lr * grads.bias[l];
    net.layers[l].weights += state.vel_weights[l];
    net.layers[l].bias += state.vel_bias[l];
  }
}

double lr_at(const LrSchedule& schedule, int epoch, int max_epochs) {
  switch (schedule.kind) {
    case LrSchedule::Kind::Constant:
      return schedule.lr;
    case LrSchedule::Kind::LogDecay: {
      if (max_epochs <= 1) return schedule.start;
      const double t =
          static_cast<double>(epoch) / static_cast<double>(max_epochs - 1);
      const double log_lr = std::log10(schedule.start) +
                            (std::log10(schedule.end) -
                             std::log10(schedule.start)) * t;
      return std::pow(10.0, log_lr);
    }
    case LrSchedule::Kind::LinearDecay:
      return std::max(schedule.start - schedule.decay_per_epoch * epoch,
                      1e-12);
  }
  throw ConfigError("unknown lr schedule");
}

double gradient_check(const Network& net, const Matrix& batch,
                      const LossTarget& target, double eps) {
  // Analytic gradients once.
  const ForwardTrace trace = forward(net, batch);
  Matrix output_grad;
  if (const auto* mse_target = std::get_if<Matrix>(&target)) {
    output_grad = mse_loss(trace.output(), *mse_target).second;
  } else {
    output_grad =
        cross_entropy_loss(trace.output(), std::get<std::vector<int>>(target))
            .second;
  }
  const Gradients analytic = backward(net, trace, output_grad);

  Network perturbed = net;
  double max_rel_err = 0.0;
  auto check_param = [&](double& param, double analytic_g) {
    const double saved = param;
    param = saved + eps;
    const double loss_plus = evaluate_loss(perturbed, batch, target);
    param = saved - eps;
    const double loss_minus = evaluate_loss(perturbed, batch, target);
    param = saved;
    const double numeric_g = (loss_plus - loss_minus) / (2.0 * eps);
    const double rel =
        std::abs(analytic_g - numeric_g) /
        std::max({std::abs(analytic_g), std::abs(numeric_g), 1e-8});
    max_rel_err = std::max(max_rel_err, rel);
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = perturbed.layers[l];
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        check_param(layer.weights(i, j), analytic.weights[l](i, j));
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      check_param(layer.bias(i), analytic.bias[l](i));
    }
  }
  return max_rel_err;
}

std::vector<double> train_loop(Network& net, int num_samples,
                               const TrainConfig& cfg, const BatchStep& step) {
  cfg.validate();
  if (num_samples < 1) throw DataError("train_loop: empty dataset");

  OptimizerState state = OptimizerState::zeros_like(net, cfg.momentum);
  Rng shuffle_rng(cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(num_samples));
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> loss_history;
  double best_loss = 0.0;
  int stall_epochs = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    // Seeded Fisher-Yates so a run is bit-reproducible from (seed, config).
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }

    const double lr = lr_at(cfg.lr_schedule, epoch, cfg.max_epochs);
    double loss_sum = 0.0;
    int batch_count = 0;
    for (int begin = 0; begin < num_samples; begin += cfg.batch_size) {
      const int end = std::min(begin + cfg.batch_size, num_samples);
      const std::vector<int> idx(order.begin() + begin, order.begin() + end);
      auto [loss, grads] = step(net, idx);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " +
                           std::to_string(epoch));
      }
      sgd_momentum_step(net, grads, state, lr);
      loss_sum += loss;
      ++batch_count;
    }
    const double epoch_loss = loss_sum / batch_count;
    loss_history.push_back(epoch_loss);

    if (epoch == 0 || epoch_loss < best_loss * (1.0 - cfg.min_delta)) {
      best_loss = epoch_loss;
      stall_epochs = 0;
    } else if (++stall_epochs >= cfg.patience) {
      break;
    }
  }
  return loss_history;
}

}  // namespace aeface
