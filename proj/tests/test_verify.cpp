#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "aeface/verify.hpp"

using namespace aeface;
namespace fs = std::filesystem;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

// Independent oracle: try a cut below every score, between every adjacent
// sorted pair, and above the max; return the best accuracy achievable.
double brute_force_best_accuracy(const std::vector<double>& scores,
                                 const std::vector<bool>& flags) {
  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  cuts.push_back(sorted.front() - 1.0);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    cuts.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    cuts.push_back(sorted[i]);  // cut exactly at a score value
  }
  cuts.push_back(sorted.back());
  cuts.push_back(sorted.back() + 1.0);

  double best = 0.0;
  for (double t : cuts) {
    int correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if ((scores[i] >= t) == flags[i]) ++correct;
    }
    best = std::max(best,
                    static_cast<double>(correct) /
                        static_cast<double>(scores.size()));
  }
  return best;
}

}  // namespace

TEST_CASE("cosine_score basics") {
  CHECK(cosine_score(vec2(3, 4), vec2(3, 4)) == 1.0);
  CHECK(cosine_score(vec2(1, 0), vec2(0, 1)) == 0.0);
  CHECK(cosine_score(vec2(1, 0), vec2(1, 1)) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_score(vec2(0, 0), vec2(1, 1)), NumericError);
  Vector three(3);
  three << 1, 2, 3;
  CHECK_THROWS_AS(cosine_score(vec2(1, 0), three), ShapeError);
}

TEST_CASE("score_pairs matches hand-computed cosines") {
  EmbeddingSet set;
  set.by_id["a"] = vec2(1, 0);
  set.by_id["b"] = vec2(1, 1);
  set.by_id["c"] = vec2(0, 2);
  set.by_id["d"] = vec2(-1, 0);

  PairList pairs;
  pairs.entries = {{"a", "b", true}, {"a", "c", false}, {"b", "d", false}};
  const std::vector<double> scores = score_pairs(set, pairs);
  REQUIRE(scores.size() == 3);
  CHECK(scores[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(scores[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(scores[2] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));

  PairList self;
  self.entries = {{"b", "b", true}};
  CHECK(score_pairs(set, self)[0] == 1.0);

  PairList missing;
  missing.entries = {{"a", "nope", true}};
  CHECK_THROWS_AS(score_pairs(set, missing), DataError);
}

TEST_CASE("choose_threshold separable case picks the midpoint") {
  const auto [threshold, accuracy] =
      choose_threshold({0.9, 0.1}, {true, false});
  CHECK(accuracy == 1.0);
  CHECK(threshold == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("choose_threshold degenerate all-same case") {
  const auto [threshold, accuracy] =
      choose_threshold({0.3, 0.8, 0.5}, {true, true, true});
  CHECK(accuracy == 1.0);
  CHECK(threshold < 0.3);
}

TEST_CASE("choose_threshold interleaved scores reach 0.75") {
  const std::vector<double> scores = {0.1, 0.2, 0.3, 0.4};
  const std::vector<bool> flags = {false, true, false, true};
  const auto [_, accuracy] = choose_threshold(scores, flags);
  CHECK(accuracy == 0.75);
  CHECK(accuracy == brute_force_best_accuracy(scores, flags));
}

TEST_CASE("choose_threshold equals brute force on random sets") {
  Rng rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 60);
    std::vector<double> scores;
    std::vector<bool> flags;
    for (int i = 0; i < n; ++i) {
      // Coarse grid so ties between scores actually occur.
      scores.push_back(std::round(rng.uniform(-1.0, 1.0) * 8.0) / 8.0);
      flags.push_back(rng.next_u64() % 2 == 0);
    }
    const auto [threshold, accuracy] = choose_threshold(scores, flags);
    CHECK(accuracy == brute_force_best_accuracy(scores, flags));
    // The returned threshold achieves the returned accuracy.
    int correct = 0;
    for (int i = 0; i < n; ++i) {
      if ((scores[static_cast<std::size_t>(i)] >= threshold) ==
          flags[static_cast<std::size_t>(i)]) {
        ++correct;
      }
    }
    CHECK(static_cast<double>(correct) / n == accuracy);
  }
}

TEST_CASE("kfold_accuracy separable scores") {
  std::vector<double> scores;
  std::vector<bool> flags;
  std::vector<int> fold_of;
  for (int f = 0; f < 5; ++f) {
    for (int i = 0; i < 4; ++i) {
      scores.push_back(0.8 + 0.01 * i);
      flags.push_back(true);
      fold_of.push_back(f);
      scores.push_back(0.2 + 0.01 * i);
      flags.push_back(false);
      fold_of.push_back(f);
    }
  }
  const EvalReport report = kfold_accuracy(scores, flags, fold_of, 5);
  CHECK(report.mean_accuracy == 1.0);
  CHECK(report.std_accuracy == 0.0);
  REQUIRE(report.per_fold.size() == 5);

  // Mean recomputable from the fold entries.
  double sum = 0.0;
  for (const FoldResult& r : report.per_fold) sum += r.accuracy;
  CHECK(std::abs(sum / 5.0 - report.mean_accuracy) < 1e-12);
}

TEST_CASE("kfold_accuracy is chance level on random scores") {
  Rng rng(777);
  std::vector<double> scores;
  std::vector<bool> flags;
  std::vector<int> fold_of;
  for (int i = 0; i < 2000; ++i) {
    scores.push_back(rng.uniform(-1.0, 1.0));
    flags.push_back(i % 2 == 0);
    // Pairs of consecutive entries share a fold so every fold holds 100
    // matched and 100 mismatched labels.
    fold_of.push_back((i / 2) % 10);
  }
  const EvalReport report = kfold_accuracy(scores, flags, fold_of, 10);
  CHECK(report.mean_accuracy > 0.45);
  CHECK(report.mean_accuracy < 0.55);
}

TEST_CASE("kfold_accuracy hand-checked two-fold set") {
  // Fold 0: same 0.9, 0.6; diff 0.2, 0.4. Fold 1: same 0.8, 0.3; diff 0.1, 0.5.
  const std::vector<double> scores = {0.9, 0.6, 0.2, 0.4, 0.8, 0.3, 0.1, 0.5};
  const std::vector<bool> flags = {true, true, false, false,
                                   true, true, false, false};
  const std::vector<int> fold_of = {0, 0, 0, 0, 1, 1, 1, 1};
  const EvalReport report = kfold_accuracy(scores, flags, fold_of, 2);

  // Fold 0 is tested with the threshold from fold 1 (0.1 d, 0.3 s, 0.5 d,
  // 0.8 s). Cuts at 0.2 and 0.65 both give 3/4 there; the smaller wins.
  // On fold 0: 0.9 and 0.6 correct, 0.2 (>= 0.2, predicted same) and 0.4
  // wrong -> 0.5.
  CHECK(report.per_fold[0].threshold == doctest::Approx(0.2));
  CHECK(report.per_fold[0].accuracy == 0.5);
  // Fold 1 is tested with the threshold from fold 0 (0.2 d, 0.4 d, 0.6 s,
  // 0.9 s): perfect cut at 0.5. On fold 1: 0.8 correct, 0.3 wrong,
  // 0.1 correct, 0.5 wrong -> 0.5.
  CHECK(report.per_fold[1].threshold == doctest::Approx(0.5));
  CHECK(report.per_fold[1].accuracy == 0.5);
  CHECK(report.mean_accuracy == doctest::Approx(0.5));

  CHECK_THROWS_AS(kfold_accuracy(scores, flags, {0, 0, 0, 0, 0, 0, 0, 0}, 2),
                  ProtocolError);
}

TEST_CASE("scores are invariant to positive embedding scaling") {
  Rng rng(99);
  EmbeddingSet base, scaled;
  PairList pairs;
  for (int i = 0; i < 20; ++i) {
    Vector v(4);
    for (int j = 0; j < 4; ++j) v(j) = rng.uniform(-1.0, 1.0);
    const std::string id = "e" + std::to_string(i);
    base.by_id[id] = v;
    scaled.by_id[id] = v * 1000.0;
  }
  for (int i = 0; i + 1 < 20; ++i) {
    pairs.entries.push_back(
        {"e" + std::to_string(i), "e" + std::to_string(i + 1), i % 2 == 0});
  }
  const auto a = score_pairs(base, pairs);
  const auto b = score_pairs(scaled, pairs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
}

TEST_CASE("report JSON shape and embeddings CSV round-trip") {
  EvalReport report;
  report.per_fold = {{0, 0.5, 0.9}, {1, 0.6, 1.0}};
  report.mean_accuracy = 0.95;
  report.std_accuracy = 0.05;
  report.k = 2;
  report.n_pairs = 8;
  const std::string json = report_to_json(report);
  CHECK(json.find("\"folds\"") != std::string::npos);
  CHECK(json.find("\"mean_accuracy\"") != std::string::npos);
  CHECK(json.find("\"meta\"") != std::string::npos);
  // Fixed key order.
  CHECK(json.find("\"folds\"") < json.find("\"mean_accuracy\""));
  CHECK(json.find("\"mean_accuracy\"") < json.find("\"std_accuracy\""));
  CHECK(json.find("\"std_accuracy\"") < json.find("\"meta\""));

  const fs::path dir = fs::temp_directory_path() / "aeface_verify_io";
  fs::create_directories(dir);
  EmbeddingSet set;
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    Vector v(3);
    for (int j = 0; j < 3; ++j) v(j) = rng.uniform(-2.0, 2.0);
    set.by_id["id" + std::to_string(i)] = v;
  }
  save_embeddings_csv(set, dir / "emb.csv");
  const EmbeddingSet loaded = load_embeddings_csv(dir / "emb.csv");
  REQUIRE(loaded.by_id.size() == 5);
  for (const auto& [id, vec] : set.by_id) {
    // 17 significant digits reproduce doubles exactly.
    CHECK(loaded.at(id) == vec);
  }
  fs::remove_all(dir);
}
