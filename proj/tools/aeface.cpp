#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aeface/config.hpp"
#include "aeface/dataio.hpp"
#include "aeface/model_io.hpp"
#include "aeface/nn.hpp"
#include "aeface/pretrain.hpp"
#include "aeface/transfer.hpp"
#include "aeface/tsne.hpp"
#include "aeface/verify.hpp"

namespace fs = std::filesystem;
using namespace aeface;

namespace {

// Exit code contract: 0 ok, 2 bad CLI usage, 3 I/O, 4 data, 5 model,
// 6 protocol/config, 7 verification failure.
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;
constexpr int kExitModel = 5;
constexpr int kExitProtocol = 6;
constexpr int kExitVerification = 7;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  long long seed_override = -1;
};

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
  if (args.seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(args.seed_override);
    cfg.synth.seed = cfg.seed;
    cfg.autoencoder.train.seed = cfg.seed;
    cfg.classifier.train.seed = cfg.seed;
    cfg.tsne.seed = cfg.seed;
  }
  return cfg;
}

fs::path require_out_dir(const CommonArgs& args) {
  const fs::path out(args.out_dir);
  if (!fs::is_directory(out)) {
    throw IoError("output directory " + out.string() + " does not exist");
  }
  return out;
}

void echo_config(const RunConfig& cfg, const fs::path& out_dir,
                 const std::string& command) {
  std::ofstream out(out_dir / (command + ".config.json"),
                    std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write resolved config");
  out << run_config_to_json(cfg);
}

void write_loss_history(const std::vector<double>& losses,
                        const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  char buf[40];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", losses[i]);
    out << i << "," << buf << "\n";
  }
}

std::vector<int> manifest_labels(const std::vector<ManifestEntry>& entries) {
  std::vector<int> labels;
  labels.reserve(entries.size());
  for (const ManifestEntry& e : entries) {
    if (!e.label) {
      throw DataError("manifest entry " + e.id + " has no label");
    }
    labels.push_back(*e.label);
  }
  return labels;
}

int cmd_synth(const CommonArgs& args) {
  const RunConfig cfg = resolve_config(args);
  const fs::path out = require_out_dir(args);
  echo_config(cfg, out, "synth");

  const SynthDataset dataset = synth_dataset(cfg.synth);
  const fs::path image_dir = out / "images";
  fs::create_directories(image_dir);

  std::vector<ManifestEntry> manifest;
  for (const ImageSample& sample : dataset.samples) {
    GrayImage image;
    image.id = sample.id;
    image.rows = kImageSide;
    image.cols = kImageSide;
    image.pixels = sample.pixels;
    const fs::path rel = fs::path("images") / (sample.id + ".pgm");
    save_pgm(image, out / rel);
    manifest.push_back({sample.id, rel, sample.label});
  }
  save_manifest(manifest, out / "manifest.csv");

  PairList pairs = make_pairs(dataset.samples, cfg.protocol.n_same,
                              cfg.protocol.n_diff, cfg.seed);
  save_pairs_csv(pairs, out / "pairs.csv");

  std::cout << "wrote " << manifest.size() << " images, "
            << pairs.entries.size() << " pairs to " << out.string() << "\n";
  return 0;
}

int cmd_pretrain(const CommonArgs& args, const std::string& manifest_path) {
  const RunConfig cfg = resolve_config(args);
  const fs::path out = require_out_dir(args);
  echo_config(cfg, out, "pretrain");

  const auto entries = load_manifest(manifest_path);
  const Matrix data = load_image_matrix(
      entries, fs::path(manifest_path).parent_path(), cfg.image_side());

  Rng rng(cfg.seed);
  Network net = build_autoencoder(cfg.autoencoder, rng);
  const std::vector<double> losses = pretrain(net, data, cfg.autoencoder);

  save_model(net, out / "model.aefv");
  write_loss_history(losses, out / "loss_history.csv");
  std::cout << "pretrained " << losses.size() << " epochs, final loss "
            << losses.back() << "\n";
  return 0;
}

int cmd_finetune(const CommonArgs& args, const std::string& ae_path,
                 const std::string& manifest_path) {
  const RunConfig cfg = resolve_config(args);
  const fs::path out = require_out_dir(args);
  echo_config(cfg, out, "finetune");

  const Network autoencoder = load_model(ae_path);
  Rng rng(cfg.seed);
  Network net;
  try {
    net = build_classifier(autoencoder, cfg.classifier, rng);
  } catch (const ConfigError& e) {
    // Loaded model incompatible with the configured classifier.
    throw ModelError(e.what());
  }

  const auto entries = load_manifest(manifest_path);
  const Matrix data = load_image_matrix(
      entries, fs::path(manifest_path).parent_path(), cfg.image_side());
  if (data.cols() != net.input_dim) {
    throw ModelError("model expects input dim " +
                     std::to_string(net.input_dim) + " but images provide " +
                     std::to_string(data.cols()));
  }
  const std::vector<int> labels = manifest_labels(entries);

  const std::vector<double> losses = finetune(net, data, labels, cfg.classifier);
  save_model(net, out / "classifier.aefv");
  write_loss_history(losses, out / "loss_history.csv");
  std::cout << "finetuned " << losses.size() << " epochs, final loss "
            << losses.back() << "\n";
  return 0;
}

int cmd_embed(const CommonArgs& args, const std::string& model_path,
              const std::string& manifest_path) {
  const RunConfig cfg = resolve_config(args);
  const fs::path out = require_out_dir(args);
  echo_config(cfg, out, "embed");

  const Network net = load_model(model_path);
  const auto side = static_cast<Eigen::Index>(
      std::llround(std::sqrt(static_cast<double>(net.input_dim))));
  if (side * side != net.input_dim) {
    throw ModelError("model input dim is not a square image");
  }

  const auto entries = load_manifest(manifest_path);
  const Matrix data =
      load_image_matrix(entries, fs::path(manifest_path).parent_path(), side);
  const Matrix embedded = extract_embeddings(net, data);

  EmbeddingSet set;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    set.by_id[entries[i].id] =
        embedded.row(static_cast<Eigen::Index>(i)).transpose();
  }
  save_embeddings_csv(set, out / "embeddings.csv");
  std::cout << "wrote " << set.by_id.size() << " embeddings of dim "
            << embedded.cols() << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& embeddings_path,
                 const std::string& pairs_path, int k) {
  const RunConfig cfg = resolve_config(args);
  const fs::path out = require_out_dir(args);
  echo_config(cfg, out, "evaluate");
  if (k <= 0) k = cfg.protocol.k;

  const EmbeddingSet embeddings = load_embeddings_csv(embeddings_path);
  const PairList pairs =
      assign_folds(load_pairs_csv(pairs_path), k, cfg.seed);
  const std::vector<double> scores = score_pairs(embeddings, pairs);
  std::vector<bool> flags;
  flags.reserve(pairs.entries.size());
  for (const PairEntry& e : pairs.entries) flags.push_back(e.same);

  EvalReport report = kfold_accuracy(scores, flags, pairs.fold_of, k);
  report.seed = cfg.seed;
  save_report(report, out / "report.json");
  std::printf("mean accuracy %.4f +/- %.4f over %d folds\n",
              report.mean_accuracy, report.std_accuracy, k);
  return 0;
}

int cmd_tsne(const CommonArgs& args, const std::string& embeddings_path,
             const std::string& manifest_path, const std::string& source) {
  const RunConfig cfg = resolve_config(args);
  const fs::path out = require_out_dir(args);
  echo_config(cfg, out, "tsne");

  Matrix points;
  std::vector<int> labels;
  if (source == "raw") {
    if (manifest_path.empty()) {
      throw DataError("tsne --source raw requires --manifest");
    }
    const auto entries = load_manifest(manifest_path);
    points = load_image_matrix(entries,
                               fs::path(manifest_path).parent_path());
    labels = manifest_labels(entries);
  } else if (source == "embeddings") {
    if (embeddings_path.empty()) {
      throw DataError("tsne --source embeddings requires --embeddings");
    }
    const EmbeddingSet set = load_embeddings_csv(embeddings_path);
    if (set.by_id.empty()) throw DataError("no embeddings loaded");
    points.resize(static_cast<Eigen::Index>(set.by_id.size()),
                  set.by_id.begin()->second.size());
    std::vector<std::string> ids;
    Eigen::Index row = 0;
    for (const auto& [id, vec] : set.by_id) {
      points.row(row++) = vec.transpose();
      ids.push_back(id);
    }
    labels.assign(ids.size(), 0);
    if (!manifest_path.empty()) {
      std::map<std::string, int> label_of;
      for (const ManifestEntry& e : load_manifest(manifest_path)) {
        if (e.label) label_of[e.id] = *e.label;
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = label_of.find(ids[i]);
        if (it != label_of.end()) labels[i] = it->second;
      }
    }
  } else {
    throw ConfigError("tsne: --source must be raw or embeddings");
  }

  const TsneResult result = tsne(points, cfg.tsne);
  export_scatter(result.coords, labels, out / "coords.csv",
                 out / "scatter.svg");
  std::cout << "tsne over " << points.rows() << " points, final KL "
            << result.kl_history.back() << "\n";
  return 0;
}

int cmd_gradcheck(const CommonArgs& args) {
  const std::uint64_t seed =
      args.seed_override >= 0 ? static_cast<std::uint64_t>(args.seed_override)
                              : 7;
  Rng rng(seed);

  struct Arch {
    const char* name;
    std::vector<Eigen::Index> dims;
    std::vector<Activation> acts;
    bool cross_entropy;
  };
  const std::vector<Arch> archs = {
      {"linear+mse", {6, 4}, {Activation::Linear}, false},
      {"relu-sigmoid-linear+mse",
       {5, 7, 6, 4},
       {Activation::ReLU, Activation::Sigmoid, Activation::Linear},
       false},
      {"sigmoid-sigmoid+mse",
       {6, 5, 3},
       {Activation::Sigmoid, Activation::Sigmoid},
       false},
      {"relu-softmax+ce",
       {6, 8, 4},
       {Activation::ReLU, Activation::Softmax},
       true},
      {"sigmoid-linear-softmax+ce",
       {5, 6, 6, 3},
       {Activation::Sigmoid, Activation::Linear, Activation::Softmax},
       true},
  };

  bool all_ok = true;
  for (const Arch& arch : archs) {
    Network net;
    net.input_dim = arch.dims.front();
    for (std::size_t l = 0; l + 1 < arch.dims.size(); ++l) {
      net.layers.push_back(
          init_layer(arch.dims[l], arch.dims[l + 1], arch.acts[l], rng));
      // Nonzero biases so bias gradients are exercised away from zero.
      for (Eigen::Index i = 0; i < net.layers.back().bias.size(); ++i) {
        net.layers.back().bias(i) = rng.uniform(-0.1, 0.1);
      }
    }

    const Eigen::Index batch = 5;
    Matrix x(batch, net.input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x.data()[i] = rng.uniform(-1.0, 1.0);
    }

    LossTarget target;
    if (arch.cross_entropy) {
      std::vector<int> labels(static_cast<std::size_t>(batch));
      for (auto& l : labels) {
        l = static_cast<int>(rng.next_u64() %
                             static_cast<std::uint64_t>(arch.dims.back()));
      }
      target = std::move(labels);
    } else {
      Matrix t(batch, arch.dims.back());
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        t.data()[i] = rng.uniform(-1.0, 1.0);
      }
      target = std::move(t);
    }

    const double err = gradient_check(net, x, target);
    const bool ok = err < 1e-4;
    all_ok = all_ok && ok;
    std::printf("%-28s max relative error %.3e %s\n", arch.name, err,
                ok ? "PASS" : "FAIL");
  }
  return all_ok ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoencoder-pretrained face verification pipeline"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string manifest_path, ae_path, model_path, embeddings_path, pairs_path;
  std::string source = "embeddings";
  int k = 0;

  auto add_common = [&common](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config_path,
                                "run configuration JSON");
    if (config_required) opt->required();
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--seed", common.seed_override,
                    "override the config seed");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, true);

  CLI::App* pre = app.add_subcommand("pretrain", "train the autoencoder");
  add_common(pre, true);
  pre->add_option("--manifest", manifest_path, "dataset manifest CSV")
      ->required();

  CLI::App* fine = app.add_subcommand("finetune", "train the classifier");
  add_common(fine, true);
  fine->add_option("--ae", ae_path, "pretrained autoencoder model")->required();
  fine->add_option("--manifest", manifest_path, "labeled manifest CSV")
      ->required();

  CLI::App* embed = app.add_subcommand("embed", "extract embeddings");
  add_common(embed, false);
  embed->add_option("--model", model_path, "classifier model")->required();
  embed->add_option("--manifest", manifest_path, "dataset manifest CSV")
      ->required();

  CLI::App* eval = app.add_subcommand("evaluate", "k-fold pair verification");
  add_common(eval, false);
  eval->add_option("--embeddings", embeddings_path, "embeddings CSV")
      ->required();
  eval->add_option("--pairs", pairs_path, "pair list CSV")->required();
  eval->add_option("--k", k, "number of folds");

  CLI::App* tsne_cmd = app.add_subcommand("tsne", "2-D t-SNE projection");
  add_common(tsne_cmd, false);
  tsne_cmd->add_option("--embeddings", embeddings_path, "embeddings CSV");
  tsne_cmd->add_option("--manifest", manifest_path, "manifest for labels/raw");
  tsne_cmd->add_option("--source", source, "raw or embeddings");

  CLI::App* grad = app.add_subcommand("gradcheck", "gradient verification");
  add_common(grad, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(common);
    if (pre->parsed()) return cmd_pretrain(common, manifest_path);
    if (fine->parsed()) return cmd_finetune(common, ae_path, manifest_path);
    if (embed->parsed()) return cmd_embed(common, model_path, manifest_path);
    if (eval->parsed())
      return cmd_evaluate(common, embeddings_path, pairs_path, k);
    if (tsne_cmd->parsed())
      return cmd_tsne(common, embeddings_path, manifest_path, source);
    if (grad->parsed()) return cmd_gradcheck(common);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitProtocol;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
