#ifndef AEFACE_TSNE_HPP_
#define AEFACE_TSNE_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "aeface/matrix.hpp"

namespace aeface {

struct TsneConfig {
  double perplexity = 30.0;  // auto-capped at (N-1)/3
  int iterations = 1000;
  double early_exaggeration = 12.0;  // applied for the first 250 iterations
  double learning_rate = 200.0;
  double initial_momentum = 0.5;   // until iteration 250
  double final_momentum = 0.8;     // afterwards
  std::uint64_t seed = 0;
};

struct TsneResult {
  Matrix coords;                   // N x 2, column means exactly zero
  std::vector<double> kl_history;  // KL divergence every 50 iterations
};

// Exact O(N^2) t-SNE. Per-point sigmas are found by binary search on the
// conditional-distribution entropy (50 iterations, tolerance 1e-5);
// affinities are symmetrized, normalized, and floored at 1e-12.
TsneResult tsne(const Matrix& points, const TsneConfig& cfg);

// Symmetrized affinity matrix alone, exposed for property tests.
Matrix tsne_affinities(const Matrix& points, double perplexity);

// Writes coords as CSV (x,y,label) and a self-contained SVG scatter with a
// fixed 12-color cycle by label.
void export_scatter(const Matrix& coords, const std::vector<int>& labels,
                    const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path);

}  // namespace aeface

#endif  // AEFACE_TSNE_HPP_
