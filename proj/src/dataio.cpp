#include "aeface/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aeface {

namespace fs = std::filesystem;

namespace {

void shuffle_in_place(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::string pad3(int v) {
  std::string s = std::to_string(v);
  while (s.size() < 3) s.insert(s.begin(), '0');
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void SynthSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synth: num_classes must be >= 2");
  if (per_class < 2) throw ConfigError("synth: per_class must be >= 2");
  if (noise_sigma < 0.0) throw ConfigError("synth: noise_sigma must be >= 0");
}

GrayImage load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  auto offset = [&in]() { return static_cast<long>(in.tellg()); };

  // Header tokens may be separated by whitespace and '#' comments.
  auto next_token = [&]() -> std::string {
    std::string token;
    int c = 0;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {}
        continue;
      }
      if (std::isspace(c)) {
        if (!token.empty()) return token;
        continue;
      }
      token.push_back(static_cast<char>(c));
    }
    return token;
  };

  const std::string magic = next_token();
  if (magic != "P5") {
    throw FormatError(path.string() + ": expected P5 magic, got \"" + magic +
                      "\" (byte offset 0)");
  }
  auto parse_dim = [&](const char* what) -> Eigen::Index {
    const std::string token = next_token();
    try {
      const long v = std::stol(token);
      if (v < 1) throw std::invalid_argument("nonpositive");
      return static_cast<Eigen::Index>(v);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad " + std::string(what) +
                        " \"" + token + "\" near byte offset " +
                        std::to_string(offset()));
    }
  };
  const Eigen::Index width = parse_dim("width");
  const Eigen::Index height = parse_dim("height");
  const std::string maxval = next_token();
  if (maxval != "255") {
    throw FormatError(path.string() + ": only maxval 255 is supported, got " +
                      maxval + " near byte offset " + std::to_string(offset()));
  }

  const std::size_t count = static_cast<std::size_t>(width * height);
  std::vector<unsigned char> raw(count);
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(count))) {
    throw FormatError(path.string() + ": truncated pixel payload at byte offset " +
                      std::to_string(offset()) + ", expected " +
                      std::to_string(count) + " bytes");
  }

  GrayImage image;
  image.id = path.stem().string();
  image.rows = height;
  image.cols = width;
  image.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    image.pixels[i] = static_cast<double>(raw[i]) / 255.0;
  }
  return image;
}

void save_pgm(const GrayImage& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.cols << " " << image.rows << "\n255\n";
  std::vector<unsigned char> raw(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

GrayImage resize_bilinear(const GrayImage& image, Eigen::Index out_rows,
                          Eigen::Index out_cols) {
  if (image.rows < 2 || image.cols < 2) {
    throw DataError("resize_bilinear: source must be at least 2x2, got " +
                    std::to_string(image.rows) + "x" +
                    std::to_string(image.cols));
  }
  if (out_rows < 1 || out_cols < 1) {
    throw DataError("resize_bilinear: degenerate output dimensions");
  }
  if (image.rows == out_rows && image.cols == out_cols) return image;

  GrayImage out;
  out.id = image.id;
  out.rows = out_rows;
  out.cols = out_cols;
  out.pixels.resize(static_cast<std::size_t>(out_rows * out_cols));

  const double row_scale =
      static_cast<double>(image.rows) / static_cast<double>(out_rows);
  const double col_scale =
      static_cast<double>(image.cols) / static_cast<double>(out_cols);
  for (Eigen::Index r = 0; r < out_rows; ++r) {
    // Pixel-center alignment with edge clamping.
    const double src_r =
        std::clamp((r + 0.5) * row_scale - 0.5, 0.0,
                   static_cast<double>(image.rows - 1));
    const Eigen::Index r0 = static_cast<Eigen::Index>(src_r);
    const Eigen::Index r1 = std::min(r0 + 1, image.rows - 1);
    const double fr = src_r - static_cast<double>(r0);
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      const double src_c =
          std::clamp((c + 0.5) * col_scale - 0.5, 0.0,
                     static_cast<double>(image.cols - 1));
      const Eigen::Index c0 = static_cast<Eigen::Index>(src_c);
      const Eigen::Index c1 = std::min(c0 + 1, image.cols - 1);
      const double fc = src_c - static_cast<double>(c0);
      const double top =
          image.at(r0, c0) * (1.0 - fc) + image.at(r0, c1) * fc;
      const double bottom =
          image.at(r1, c0) * (1.0 - fc) + image.at(r1, c1) * fc;
      out.pixels[static_cast<std::size_t>(r * out_cols + c)] =
          top * (1.0 - fr) + bottom * fr;
    }
  }
  return out;
}

SynthDataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SynthDataset dataset;
  dataset.prototypes.reserve(static_cast<std::size_t>(spec.num_classes));
  dataset.samples.reserve(
      static_cast<std::size_t>(spec.num_classes * spec.per_class));

  const auto side = static_cast<double>(kImageSide);
  for (int cls = 0; cls < spec.num_classes; ++cls) {
    struct Bump {
      double cx, cy, sigma, amp;
    };
    Bump bumps[3];
    for (Bump& b : bumps) {
      b.cx = rng.uniform(0.0, side);
      b.cy = rng.uniform(0.0, side);
      b.sigma = rng.uniform(10.0, 30.0);
      b.amp = rng.uniform(0.5, 1.0);
    }
    std::vector<double> proto(static_cast<std::size_t>(kImagePixels), 0.0);
    for (Eigen::Index r = 0; r < kImageSide; ++r) {
      for (Eigen::Index c = 0; c < kImageSide; ++c) {
        double v = 0.0;
        for (const Bump& b : bumps) {
          const double dr = static_cast<double>(r) - b.cy;
          const double dc = static_cast<double>(c) - b.cx;
          v += b.amp * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
        }
        proto[static_cast<std::size_t>(r * kImageSide + c)] = v;
      }
    }
    const auto [lo_it, hi_it] = std::minmax_element(proto.begin(), proto.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi > lo) {
      for (double& v : proto) v = (v - lo) / (hi - lo);
    } else {
      std::fill(proto.begin(), proto.end(), 0.0);
    }

    ImageSample proto_sample;
    proto_sample.id = "proto_c" + pad3(cls);
    proto_sample.label = cls;
    proto_sample.pixels = proto;
    dataset.prototypes.push_back(std::move(proto_sample));

    for (int s = 0; s < spec.per_class; ++s) {
      ImageSample sample;
      sample.id = "c" + pad3(cls) + "_s" + pad3(s);
      sample.label = cls;
      sample.pixels.resize(proto.size());
      for (std::size_t i = 0; i < proto.size(); ++i) {
        sample.pixels[i] =
            std::clamp(proto[i] + rng.normal(0.0, spec.noise_sigma), 0.0, 1.0);
      }
      dataset.samples.push_back(std::move(sample));
    }
  }
  return dataset;
}

PairList make_pairs(const std::vector<ImageSample>& samples, int n_same,
                    int n_diff, std::uint64_t seed) {
  if (n_same < 0 || n_diff < 0) throw DataError("make_pairs: negative counts");
  const int n = static_cast<int>(samples.size());
  for (const ImageSample& s : samples) {
    if (!s.label) throw DataError("make_pairs: sample " + s.id + " is unlabeled");
  }

  std::vector<std::pair<int, int>> same_pool;
  std::vector<std::pair<int, int>> diff_pool;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (*samples[i].label == *samples[j].label) {
        same_pool.emplace_back(i, j);
      } else {
        diff_pool.emplace_back(i, j);
      }
    }
  }
  if (static_cast<int>(same_pool.size()) < n_same) {
    throw DataError("make_pairs: only " + std::to_string(same_pool.size()) +
                    " same-class pairs exist, " + std::to_string(n_same) +
                    " requested");
  }
  if (static_cast<int>(diff_pool.size()) < n_diff) {
    throw DataError("make_pairs: only " + std::to_string(diff_pool.size()) +
                    " different-class pairs exist, " + std::to_string(n_diff) +
                    " requested");
  }

  Rng rng(seed);
  auto draw = [&rng](std::vector<std::pair<int, int>>& pool, int count) {
    // Partial Fisher-Yates: the first `count` slots end up a uniform
    // sample without replacement.
    for (int i = 0; i < count; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) +
          static_cast<std::size_t>(rng.next_u64() % (pool.size() - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
  };
  draw(same_pool, n_same);
  draw(diff_pool, n_diff);

  PairList pairs;
  pairs.entries.reserve(static_cast<std::size_t>(n_same + n_diff));
  for (int i = 0; i < n_same; ++i) {
    const auto [a, b] = same_pool[static_cast<std::size_t>(i)];
    pairs.entries.push_back({samples[a].id, samples[b].id, true});
  }
  for (int i = 0; i < n_diff; ++i) {
    const auto [a, b] = diff_pool[static_cast<std::size_t>(i)];
    pairs.entries.push_back({samples[a].id, samples[b].id, false});
  }
  return pairs;
}

PairList assign_folds(const PairList& pairs, int k, std::uint64_t seed) {
  if (k < 1) throw ProtocolError("assign_folds: k must be >= 1");
  std::vector<int> matched;
  std::vector<int> mismatched;
  for (std::size_t i = 0; i < pairs.entries.size(); ++i) {
    (pairs.entries[i].same ? matched : mismatched)
        .push_back(static_cast<int>(i));
  }
  const auto check_divisible = [k](std::size_t count, const char* what) {
    if (count % static_cast<std::size_t>(k) != 0) {
      throw ProtocolError(std::string("assign_folds: ") +
                          std::to_string(count) + " " + what +
                          " entries not divisible by k=" + std::to_string(k));
    }
  };
  check_divisible(matched.size(), "matched");
  check_divisible(mismatched.size(), "mismatched");

  Rng rng(seed);
  shuffle_in_place(matched, rng);
  shuffle_in_place(mismatched, rng);

  PairList out = pairs;
  out.fold_of.assign(pairs.entries.size(), -1);
  const std::size_t same_per_fold = matched.size() / static_cast<std::size_t>(k);
  const std::size_t diff_per_fold =
      mismatched.size() / static_cast<std::size_t>(k);
  for (std::size_t i = 0; i < matched.size(); ++i) {
    out.fold_of[static_cast<std::size_t>(matched[i])] =
        static_cast<int>(i / same_per_fold);
  }
  for (std::size_t i = 0; i < mismatched.size(); ++i) {
    out.fold_of[static_cast<std::size_t>(mismatched[i])] =
        static_cast<int>(i / diff_per_fold);
  }
  return out;
}

void save_manifest(const std::vector<ManifestEntry>& entries,
                   const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "id,path,label\n";
  for (const ManifestEntry& e : entries) {
    out << e.id << "," << e.path.generic_string() << ",";
    if (e.label) out << *e.label;
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "id,path,label") {
    throw DataError(path.string() + ": expected manifest header id,path,label");
  }
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.id = fields[0];
    e.path = fields[1];
    if (!fields[2].empty()) {
      try {
        e.label = std::stoi(fields[2]);
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": bad label \"" + fields[2] + "\"");
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_pairs_csv(const PairList& pairs, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "id_a,id_b,same\n";
  for (const PairEntry& e : pairs.entries) {
    out << e.id_a << "," << e.id_b << "," << (e.same ? 1 : 0) << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

PairList load_pairs_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "id_a,id_b,same") {
    throw DataError(path.string() + ": expected pair header id_a,id_b,same");
  }
  PairList pairs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3 || (fields[2] != "0" && fields[2] != "1")) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed pair row");
    }
    pairs.entries.push_back({fields[0], fields[1], fields[2] == "1"});
  }
  return pairs;
}

PairList load_lfw_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  auto lfw_id = [](const std::string& name, const std::string& num) {
    std::string padded = num;
    while (padded.size() < 4) padded.insert(padded.begin(), '0');
    return name + "_" + padded;
  };

  PairList pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string token;
    while (fields >> token) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() <= 2) continue;  // fold-count header line
    if (tokens.size() == 3) {
      pairs.entries.push_back(
          {lfw_id(tokens[0], tokens[1]), lfw_id(tokens[0], tokens[2]), true});
    } else if (tokens.size() == 4) {
      pairs.entries.push_back(
          {lfw_id(tokens[0], tokens[1]), lfw_id(tokens[2], tokens[3]), false});
    } else {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unrecognized pairs.txt row");
    }
  }
  return pairs;
}

Matrix load_image_matrix(const std::vector<ManifestEntry>& entries,
                         const fs::path& base_dir, Eigen::Index side) {
  if (entries.empty()) throw DataError("load_image_matrix: empty manifest");
  Matrix data(static_cast<Eigen::Index>(entries.size()), side * side);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const fs::path p = entries[i].path.is_absolute()
                           ? entries[i].path
                           : base_dir / entries[i].path;
    GrayImage image;
    try {
      image = resize_bilinear(load_pgm(p), side, side);
    } catch (const IoError&) {
      throw DataError("missing image file for id " + entries[i].id + " (" +
                      p.string() + ")");
    }
    for (Eigen::Index j = 0; j < side * side; ++j) {
      data(static_cast<Eigen::Index>(i), j) =
          image.pixels[static_cast<std::size_t>(j)];
    }
  }
  return data;
}

}  // namespace aeface
