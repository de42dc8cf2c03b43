#include "aeface/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace aeface {
namespace {

constexpr double kSentinelEps = 1e-6;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double accuracy_at(const std::vector<double>& scores,
                   const std::vector<bool>& same_flags, double threshold) {
  int correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted_same = scores[i] >= threshold;
    if (predicted_same == same_flags[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace

const Vector& EmbeddingSet::at(const std::string& id) const {
  const auto it = by_id.find(id);
  if (it == by_id.end()) {
    throw DataError("no embedding for id \"" + id + "\"");
  }
  return it->second;
}

double cosine_score(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_score: dimensions differ, " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  const double sq_a = a.squaredNorm();
  const double sq_b = b.squaredNorm();
  if (sq_a == 0.0 || sq_b == 0.0) {
    throw NumericError("cosine_score: zero vector");
  }
  // sqrt of the product (not product of sqrts) keeps self-similarity at
  // exactly 1.0.
  return std::clamp(a.dot(b) / std::sqrt(sq_a * sq_b), -1.0, 1.0);
}

std::vector<double> score_pairs(const EmbeddingSet& embeddings,
                                const PairList& pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.entries.size());
  for (const PairEntry& e : pairs.entries) {
    scores.push_back(cosine_score(embeddings.at(e.id_a), embeddings.at(e.id_b)));
  }
  return scores;
}

std::pair<double, double> choose_threshold(
    const std::vector<double>& scores, const std::vector<bool>& same_flags) {
  if (scores.empty()) throw DataError("choose_threshold: no scores");
  if (scores.size() != same_flags.size()) {
    throw ShapeError("choose_threshold: score/flag counts differ");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  const int n = static_cast<int>(scores.size());
  const int n_same =
      static_cast<int>(std::count(same_flags.begin(), same_flags.end(), true));

  // Sweep thresholds from below the minimum upward. At each candidate the
  // correct count changes only by the entries just crossed.
  double best_threshold = scores[order.front()] - kSentinelEps;
  int correct = n_same;  // everything predicted "same"
  int best_correct = correct;

  std::size_t i = 0;
  while (i < order.size()) {
    const double value = scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == value) {
      // Entries at `value` fall below the next candidate threshold and flip
      // to a "different" prediction.
      correct += same_flags[order[j]] ? -1 : 1;
      ++j;
    }
    const double candidate =
        (j < order.size()) ? 0.5 * (value + scores[order[j]])
                           : scores[order.back()] + kSentinelEps;
    if (correct > best_correct) {
      best_correct = correct;
      best_threshold = candidate;
    }
    i = j;
  }
  return {best_threshold,
          static_cast<double>(best_correct) / static_cast<double>(n)};
}

EvalReport kfold_accuracy(const std::vector<double>& scores,
                          const std::vector<bool>& same_flags,
                          const std::vector<int>& fold_of, int k) {
  if (scores.size() != same_flags.size() || scores.size() != fold_of.size()) {
    throw ShapeError("kfold_accuracy: input lengths differ");
  }
  if (k < 1) throw ProtocolError("kfold_accuracy: k must be >= 1");
  for (int f : fold_of) {
    if (f < 0 || f >= k) {
      throw ProtocolError("kfold_accuracy: fold index " + std::to_string(f) +
                          " outside [0, " + std::to_string(k) + ")");
    }
  }

  EvalReport report;
  report.k = k;
  report.n_pairs = static_cast<int>(scores.size());
  for (int fold = 0; fold < k; ++fold) {
    std::vector<double> train_scores, test_scores;
    std::vector<bool> train_flags, test_flags;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (fold_of[i] == fold) {
        test_scores.push_back(scores[i]);
        test_flags.push_back(same_flags[i]);
      } else {
        train_scores.push_back(scores[i]);
        train_flags.push_back(same_flags[i]);
      }
    }
    if (test_scores.empty()) {
      throw ProtocolError("kfold_accuracy: fold " + std::to_string(fold) +
                          " is empty");
    }
    // k == 1 degenerates to selecting and testing on the same data.
    const auto [threshold, _] = choose_threshold(
        train_scores.empty() ? test_scores : train_scores,
        train_flags.empty() ? test_flags : train_flags);
    report.per_fold.push_back(
        {fold, threshold, accuracy_at(test_scores, test_flags, threshold)});
  }

  double sum = 0.0;
  for (const FoldResult& r : report.per_fold) sum += r.accuracy;
  report.mean_accuracy = sum / static_cast<double>(k);
  double var = 0.0;
  for (const FoldResult& r : report.per_fold) {
    const double d = r.accuracy - report.mean_accuracy;
    var += d * d;
  }
  report.std_accuracy = std::sqrt(var / static_cast<double>(k));
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["folds"] = nlohmann::ordered_json::array();
  for (const FoldResult& r : report.per_fold) {
    j["folds"].push_back({{"fold", r.fold},
                          {"threshold", r.threshold},
                          {"accuracy", r.accuracy}});
  }
  j["mean_accuracy"] = report.mean_accuracy;
  j["std_accuracy"] = report.std_accuracy;
  j["meta"] = {{"k", report.k},
               {"n_pairs", report.n_pairs},
               {"seed", report.seed}};
  return j.dump(2) + "\n";
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << report_to_json(report);
  if (!out) throw IoError("write failed for " + path.string());
}

void save_embeddings_csv(const EmbeddingSet& embeddings,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& [id, vec] : embeddings.by_id) {
    out << id;
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
      out << "," << format_g17(vec(i));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

EmbeddingSet load_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  EmbeddingSet set;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id;
    if (!std::getline(fields, id, ',')) continue;
    std::vector<double> values;
    std::string token;
    while (std::getline(fields, token, ',')) {
      try {
        values.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": bad number \"" + token + "\"");
      }
    }
    if (values.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": row has no embedding values");
    }
    if (dim < 0) dim = static_cast<Eigen::Index>(values.size());
    if (static_cast<Eigen::Index>(values.size()) != dim) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": inconsistent embedding width");
    }
    set.by_id[id] = Eigen::Map<const Vector>(
        values.data(), static_cast<Eigen::Index>(values.size()));
  }
  return set;
}

}  // namespace aeface
