#ifndef AEFACE_DATAIO_HPP_
#define AEFACE_DATAIO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aeface/matrix.hpp"

namespace aeface {

inline constexpr Eigen::Index kImageSide = 112;
inline constexpr Eigen::Index kImagePixels = kImageSide * kImageSide;

struct GrayImage {
  std::string id;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> pixels;  // row-major, values in [0, 1]

  double at(Eigen::Index r, Eigen::Index c) const {
    return pixels[static_cast<std::size_t>(r * cols + c)];
  }
};

struct ImageSample {
  std::string id;
  std::optional<int> label;
  std::vector<double> pixels;  // exactly kImagePixels, values in [0, 1]
};

struct PairEntry {
  std::string id_a;
  std::string id_b;
  bool same = false;
};

struct PairList {
  std::vector<PairEntry> entries;
  std::vector<int> fold_of;  // empty until assign_folds has run
};

struct SynthSpec {
  int num_classes = 8;
  int per_class = 20;
  double noise_sigma = 0.08;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthDataset {
  std::vector<ImageSample> samples;
  std::vector<ImageSample> prototypes;  // one per class, label set
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  std::optional<int> label;
};

// Binary PGM (P5, maxval 255) only; format errors carry the byte offset.
GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

// Bilinear resize with edge clamping. Matching dimensions return the
// input unchanged, bitwise.
GrayImage resize_bilinear(const GrayImage& image,
                          Eigen::Index out_rows = kImageSide,
                          Eigen::Index out_cols = kImageSide);

// Per class: a prototype of 3 seeded Gaussian bumps on the 112x112 grid,
// min-max normalized to [0,1]; samples are the prototype plus clamped
// Gaussian pixel noise. Deterministic per seed.
SynthDataset synth_dataset(const SynthSpec& spec);

// Uniform sampling without replacement of same-class and different-class
// pairs; all matched entries precede all mismatched entries.
PairList make_pairs(const std::vector<ImageSample>& samples, int n_same,
                    int n_diff, std::uint64_t seed);

// Stratified fold assignment: each fold gets exactly n_same/k matched and
// n_diff/k mismatched entries. Indivisible counts are a ProtocolError.
PairList assign_folds(const PairList& pairs, int k, std::uint64_t seed);

// Dataset manifest CSV: header "id,path,label", label empty for unlabeled.
void save_manifest(const std::vector<ManifestEntry>& entries,
                   const std::filesystem::path& path);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

// Pair CSV: header "id_a,id_b,same" with same in {0,1}.
void save_pairs_csv(const PairList& pairs, const std::filesystem::path& path);
PairList load_pairs_csv(const std::filesystem::path& path);

// LFW-style pairs.txt: tab-separated "name n1 n2" (matched) or
// "name1 n1 name2 n2" (mismatched); ids become name_XXXX (4-digit).
PairList load_lfw_pairs(const std::filesystem::path& path);

// Loads every manifest image, resizing to side x side, one flattened
// row per sample in manifest order.
Matrix load_image_matrix(const std::vector<ManifestEntry>& entries,
                         const std::filesystem::path& base_dir,
                         Eigen::Index side = kImageSide);

}  // namespace aeface

#endif  // AEFACE_DATAIO_HPP_
