#ifndef AEFACE_VERIFY_HPP_
#define AEFACE_VERIFY_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aeface/dataio.hpp"
#include "aeface/matrix.hpp"

namespace aeface {

struct EmbeddingSet {
  // Ordered map keeps CSV export deterministic.
  std::map<std::string, Vector> by_id;

  const Vector& at(const std::string& id) const;
};

struct FoldResult {
  int fold = 0;
  double threshold = 0.0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::vector<FoldResult> per_fold;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over folds
  int k = 0;
  int n_pairs = 0;
  std::uint64_t seed = 0;
};

// a.b / (|a||b|), clamped to [-1, 1]. Zero vectors are a NumericError.
double cosine_score(const Vector& a, const Vector& b);

// One score per pair entry, order preserved. Missing ids name the id.
std::vector<double> score_pairs(const EmbeddingSet& embeddings,
                                const PairList& pairs);

// Candidate thresholds are midpoints between consecutive distinct sorted
// scores plus sentinels below the min and above the max; predicts "same"
// iff score >= threshold. Ties broken toward the smallest threshold.
std::pair<double, double> choose_threshold(const std::vector<double>& scores,
                                           const std::vector<bool>& same_flags);

// LFW-style protocol: per fold, the threshold is chosen on the other k-1
// folds and accuracy measured on the held-out fold.
EvalReport kfold_accuracy(const std::vector<double>& scores,
                          const std::vector<bool>& same_flags,
                          const std::vector<int>& fold_of, int k);

// JSON with fixed key order:
// {"folds":[{"fold","threshold","accuracy"}...],
//  "mean_accuracy","std_accuracy","meta":{...}}.
std::string report_to_json(const EvalReport& report);
void save_report(const EvalReport& report, const std::filesystem::path& path);

// Embedding CSV: one row per sample, id followed by the vector entries
// printed with 17 significant digits.
void save_embeddings_csv(const EmbeddingSet& embeddings,
                         const std::filesystem::path& path);
EmbeddingSet load_embeddings_csv(const std::filesystem::path& path);

}  // namespace aeface

#endif  // AEFACE_VERIFY_HPP_
