#include "aeface/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace aeface {
namespace {

constexpr double kAffinityFloor = 1e-12;
constexpr int kSigmaSearchIters = 50;
constexpr double kSigmaSearchTol = 1e-5;
constexpr int kScheduleSwitch = 250;  // exaggeration off, momentum up
constexpr int kKlEvery = 50;

Matrix pairwise_sq_dists(const Matrix& x) {
  const Vector sq = x.rowwise().squaredNorm();
  Matrix d = (-2.0 * x * x.transpose()).eval();
  d.colwise() += sq;
  d.rowwise() += sq.transpose();
  return d.cwiseMax(0.0);
}

double kl_divergence(const Matrix& p, const Matrix& q) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j) continue;
      kl += p(i, j) * std::log(p(i, j) / std::max(q(i, j), kAffinityFloor));
    }
  }
  return kl;
}

}  // namespace

Matrix tsne_affinities(const Matrix& points, double perplexity) {
  const Eigen::Index n = points.rows();
  const Matrix dists = pairwise_sq_dists(points);
  const double target_entropy = std::log(perplexity);

  Matrix conditional = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;  // 1 / (2 sigma^2)
    double beta_min = -std::numeric_limits<double>::infinity();
    double beta_max = std::numeric_limits<double>::infinity();
    Eigen::ArrayXd p(n);
    for (int iter = 0; iter < kSigmaSearchIters; ++iter) {
      p = (-beta * dists.row(i).transpose().array()).exp();
      p(i) = 0.0;
      const double sum_p = std::max(p.sum(), kAffinityFloor);
      // Shannon entropy of the conditional distribution, in nats.
      const double entropy =
          std::log(sum_p) + beta * (dists.row(i).transpose().array() * p).sum() / sum_p;
      p /= sum_p;
      const double diff = entropy - target_entropy;
      if (std::abs(diff) < kSigmaSearchTol) break;
      if (diff > 0.0) {
        beta_min = beta;
        beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
      } else {
        beta_max = beta;
        beta = std::isinf(beta_min) ? beta / 2.0 : 0.5 * (beta + beta_min);
      }
    }
    conditional.row(i) = p.matrix().transpose();
  }

  Matrix p = (conditional + conditional.transpose()) / (2.0 * n);
  p.diagonal().setZero();
  // Floor, renormalize, floor again: entries stay >= 1e-12 while the total
  // remains 1 to well within 1e-9.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) p(i, j) = std::max(p(i, j), kAffinityFloor);
    }
  }
  p /= p.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) p(i, j) = std::max(p(i, j), kAffinityFloor);
    }
  }
  return p;
}

TsneResult tsne(const Matrix& points, const TsneConfig& cfg) {
  const Eigen::Index n = points.rows();
  if (n < 3) {
    throw ConfigError("tsne: need at least 3 points, got " + std::to_string(n));
  }
  require_finite(points, "tsne input");

  const double perplexity =
      std::min(cfg.perplexity, static_cast<double>(n - 1) / 3.0);
  if (perplexity <= 1.0) {
    throw ConfigError("tsne: perplexity " + std::to_string(perplexity) +
                      " infeasible after capping at (N-1)/3; need more points");
  }

  const Matrix p = tsne_affinities(points, perplexity);

  Rng rng(cfg.seed);
  Matrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      y(i, j) = rng.normal(0.0, 1e-4);
    }
  }
  Matrix velocity = Matrix::Zero(n, 2);

  TsneResult result;
  Matrix q(n, n);
  Matrix kernel(n, n);  // (1 + |yi-yj|^2)^-1, Student-t numerator

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const Matrix ydists = pairwise_sq_dists(y);
    kernel = (1.0 + ydists.array()).inverse().matrix();
    kernel.diagonal().setZero();
    q = kernel / kernel.sum();

    const double exaggeration =
        iter < kScheduleSwitch ? cfg.early_exaggeration : 1.0;
    const double momentum =
        iter < kScheduleSwitch ? cfg.initial_momentum : cfg.final_momentum;

    Matrix grad = Matrix::Zero(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w =
            4.0 * (exaggeration * p(i, j) - q(i, j)) * kernel(i, j);
        grad.row(i) += w * (y.row(i) - y.row(j));
      }
    }

    velocity = momentum * velocity - cfg.learning_rate * grad;
    y += velocity;
    y.rowwise() -= y.colwise().mean();

    if ((iter + 1) % kKlEvery == 0 || iter + 1 == cfg.iterations) {
      result.kl_history.push_back(kl_divergence(p, q));
    }
  }

  // Final centering; the last row absorbs the floating-point residual so
  // column sums (and means) land on exactly zero.
  y.rowwise() -= y.colwise().mean();
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (int pass = 0; pass < 8 && y.col(j).sum() != 0.0; ++pass) {
      y(n - 1, j) -= y.col(j).sum();
    }
  }
  result.coords = std::move(y);
  return result;
}

void export_scatter(const Matrix& coords, const std::vector<int>& labels,
                    const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path) {
  if (coords.cols() != 2) throw ShapeError("export_scatter: coords must be Nx2");
  if (static_cast<Eigen::Index>(labels.size()) != coords.rows()) {
    throw DataError("export_scatter: " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(coords.rows()) + " points");
  }

  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot open " + csv_path.string() + " for writing");
  csv << "x,y,label\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    csv << coords(i, 0) << "," << coords(i, 1) << ","
        << labels[static_cast<std::size_t>(i)] << "\n";
  }
  if (!csv) throw IoError("write failed for " + csv_path.string());

  static const char* kPalette[12] = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

  const double min_x = coords.col(0).minCoeff();
  const double max_x = coords.col(0).maxCoeff();
  const double min_y = coords.col(1).minCoeff();
  const double max_y = coords.col(1).maxCoeff();
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double margin_x = 0.05 * span_x;
  const double margin_y = 0.05 * span_y;
  constexpr double kSize = 800.0;

  std::ofstream svg(svg_path, std::ios::binary | std::ios::trunc);
  if (!svg) throw IoError("cannot open " + svg_path.string() + " for writing");
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
      << "\" height=\"" << kSize << "\" viewBox=\"0 0 " << kSize << " "
      << kSize << "\">\n";
  svg << "<rect width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"white\"/>\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const double px = (coords(i, 0) - (min_x - margin_x)) /
                      (span_x + 2.0 * margin_x) * kSize;
    // SVG y grows downward.
    const double py = kSize - (coords(i, 1) - (min_y - margin_y)) /
                                  (span_y + 2.0 * margin_y) * kSize;
    const int color = ((labels[static_cast<std::size_t>(i)] % 12) + 12) % 12;
    svg << "<circle cx=\"" << px << "\" cy=\"" << py
        << "\" r=\"4\" fill=\"" << kPalette[color] << "\"/>\n";
  }
  svg << "</svg>\n";
  if (!svg) throw IoError("write failed for " + svg_path.string());
}

}  // namespace aeface
