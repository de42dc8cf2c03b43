#include "aeface/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace aeface {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) {
    throw ConfigError(where + ": expected a JSON object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

LrSchedule parse_lr(const json& obj, const std::string& where) {
  require_keys(obj, where, {"kind", "lr", "start", "end", "decay_per_epoch"});
  const std::string kind = obj.at("kind").get<std::string>();
  if (kind == "constant") {
    return LrSchedule::constant(obj.at("lr").get<double>());
  }
  if (kind == "log_decay") {
    return LrSchedule::log_decay(obj.at("start").get<double>(),
                                 obj.at("end").get<double>());
  }
  if (kind == "linear_decay") {
    return LrSchedule::linear_decay(obj.at("start").get<double>(),
                                    obj.at("decay_per_epoch").get<double>());
  }
  throw ConfigError(where + ": unknown lr kind \"" + kind + "\"");
}

ordered_json lr_to_json(const LrSchedule& lr) {
  switch (lr.kind) {
    case LrSchedule::Kind::Constant:
      return {{"kind", "constant"}, {"lr", lr.lr}};
    case LrSchedule::Kind::LogDecay:
      return {{"kind", "log_decay"}, {"start", lr.start}, {"end", lr.end}};
    case LrSchedule::Kind::LinearDecay:
      return {{"kind", "linear_decay"},
              {"start", lr.start},
              {"decay_per_epoch", lr.decay_per_epoch}};
  }
  throw ConfigError("unknown lr schedule");
}

void parse_train(const json& obj, const std::string& where, TrainConfig& out) {
  require_keys(obj, where,
               {"max_epochs", "batch_size", "momentum", "patience",
                "min_delta", "lr"});
  maybe(obj, "max_epochs", out.max_epochs);
  maybe(obj, "batch_size", out.batch_size);
  maybe(obj, "momentum", out.momentum);
  maybe(obj, "patience", out.patience);
  maybe(obj, "min_delta", out.min_delta);
  if (obj.contains("lr")) out.lr_schedule = parse_lr(obj.at("lr"), where + ".lr");
}

ordered_json train_to_json(const TrainConfig& cfg) {
  return {{"max_epochs", cfg.max_epochs},
          {"batch_size", cfg.batch_size},
          {"momentum", cfg.momentum},
          {"patience", cfg.patience},
          {"min_delta", cfg.min_delta},
          {"lr", lr_to_json(cfg.lr_schedule)}};
}

Activation parse_activation(const std::string& name, const std::string& where) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::ReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "softmax") return Activation::Softmax;
  throw ConfigError(where + ": unknown activation \"" + name + "\"");
}

InitMode parse_init_mode(const std::string& name, const std::string& where) {
  if (name == "encoder_only") return InitMode::EncoderOnly;
  if (name == "full_autoencoder") return InitMode::FullAutoencoder;
  if (name == "random_baseline") return InitMode::RandomBaseline;
  throw ConfigError(where + ": unknown init_mode \"" + name + "\"");
}

const char* init_mode_name(InitMode mode) {
  switch (mode) {
    case InitMode::EncoderOnly: return "encoder_only";
    case InitMode::FullAutoencoder: return "full_autoencoder";
    case InitMode::RandomBaseline: return "random_baseline";
  }
  return "?";
}

}  // namespace

Eigen::Index RunConfig::image_side() const {
  const auto side = static_cast<Eigen::Index>(
      std::llround(std::sqrt(static_cast<double>(autoencoder.input_dim))));
  if (side * side != autoencoder.input_dim) {
    throw ConfigError("autoencoder.input_dim " +
                      std::to_string(autoencoder.input_dim) +
                      " is not a perfect square");
  }
  return side;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }

  require_keys(root, "config",
               {"seed", "synth", "autoencoder", "classifier", "protocol",
                "tsne"});

  RunConfig cfg;
  maybe(root, "seed", cfg.seed);

  if (root.contains("synth")) {
    const json& s = root.at("synth");
    require_keys(s, "synth", {"num_classes", "per_class", "noise_sigma"});
    maybe(s, "num_classes", cfg.synth.num_classes);
    maybe(s, "per_class", cfg.synth.per_class);
    maybe(s, "noise_sigma", cfg.synth.noise_sigma);
  }

  if (root.contains("autoencoder")) {
    const json& a = root.at("autoencoder");
    require_keys(a, "autoencoder", {"input_dim", "hidden1", "code_dim", "train"});
    long input_dim = cfg.autoencoder.input_dim;
    long hidden1 = cfg.autoencoder.hidden1;
    long code_dim = cfg.autoencoder.code_dim;
    maybe(a, "input_dim", input_dim);
    maybe(a, "hidden1", hidden1);
    maybe(a, "code_dim", code_dim);
    cfg.autoencoder.input_dim = input_dim;
    cfg.autoencoder.hidden1 = hidden1;
    cfg.autoencoder.code_dim = code_dim;
    if (a.contains("train")) {
      parse_train(a.at("train"), "autoencoder.train", cfg.autoencoder.train);
    }
  }

  if (root.contains("classifier")) {
    const json& c = root.at("classifier");
    require_keys(c, "classifier",
                 {"embed_dim", "num_classes", "init_mode",
                  "new_layer_activation", "force_sigmoid_all", "train"});
    long embed_dim = cfg.classifier.embed_dim;
    long num_classes = cfg.classifier.num_classes;
    maybe(c, "embed_dim", embed_dim);
    maybe(c, "num_classes", num_classes);
    cfg.classifier.embed_dim = embed_dim;
    cfg.classifier.num_classes = num_classes;
    if (c.contains("init_mode")) {
      cfg.classifier.init_mode = parse_init_mode(
          c.at("init_mode").get<std::string>(), "classifier.init_mode");
    }
    if (c.contains("new_layer_activation")) {
      cfg.classifier.new_layer_activation =
          parse_activation(c.at("new_layer_activation").get<std::string>(),
                           "classifier.new_layer_activation");
    }
    maybe(c, "force_sigmoid_all", cfg.classifier.force_sigmoid_all);
    if (c.contains("train")) {
      parse_train(c.at("train"), "classifier.train", cfg.classifier.train);
    }
  }

  if (root.contains("protocol")) {
    const json& p = root.at("protocol");
    require_keys(p, "protocol", {"k", "n_same", "n_diff"});
    maybe(p, "k", cfg.protocol.k);
    maybe(p, "n_same", cfg.protocol.n_same);
    maybe(p, "n_diff", cfg.protocol.n_diff);
  }

  if (root.contains("tsne")) {
    const json& t = root.at("tsne");
    require_keys(t, "tsne",
                 {"perplexity", "iterations", "early_exaggeration",
                  "learning_rate", "initial_momentum", "final_momentum"});
    maybe(t, "perplexity", cfg.tsne.perplexity);
    maybe(t, "iterations", cfg.tsne.iterations);
    maybe(t, "early_exaggeration", cfg.tsne.early_exaggeration);
    maybe(t, "learning_rate", cfg.tsne.learning_rate);
    maybe(t, "initial_momentum", cfg.tsne.initial_momentum);
    maybe(t, "final_momentum", cfg.tsne.final_momentum);
  }

  // Seeds propagate from the top-level value unless overridden later.
  cfg.synth.seed = cfg.seed;
  cfg.autoencoder.train.seed = cfg.seed;
  cfg.classifier.train.seed = cfg.seed;
  cfg.tsne.seed = cfg.seed;
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["synth"] = {{"num_classes", cfg.synth.num_classes},
                {"per_class", cfg.synth.per_class},
                {"noise_sigma", cfg.synth.noise_sigma}};
  j["autoencoder"] = {{"input_dim", cfg.autoencoder.input_dim},
                      {"hidden1", cfg.autoencoder.hidden1},
                      {"code_dim", cfg.autoencoder.code_dim},
                      {"train", train_to_json(cfg.autoencoder.train)}};
  j["classifier"] = {
      {"embed_dim", cfg.classifier.embed_dim},
      {"num_classes", cfg.classifier.num_classes},
      {"init_mode", init_mode_name(cfg.classifier.init_mode)},
      {"new_layer_activation",
       activation_name(cfg.classifier.new_layer_activation)},
      {"force_sigmoid_all", cfg.classifier.force_sigmoid_all},
      {"train", train_to_json(cfg.classifier.train)}};
  j["protocol"] = {{"k", cfg.protocol.k},
                   {"n_same", cfg.protocol.n_same},
                   {"n_diff", cfg.protocol.n_diff}};
  j["tsne"] = {{"perplexity", cfg.tsne.perplexity},
               {"iterations", cfg.tsne.iterations},
               {"early_exaggeration", cfg.tsne.early_exaggeration},
               {"learning_rate", cfg.tsne.learning_rate},
               {"initial_momentum", cfg.tsne.initial_momentum},
               {"final_momentum", cfg.tsne.final_momentum}};
  return j.dump(2) + "\n";
}

}  // namespace aeface
