#ifndef AEFACE_MATRIX_HPP_
#define AEFACE_MATRIX_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "aeface/errors.hpp"

namespace aeface {

// Row-major storage is load-bearing: the AEFV persistence format dumps
// weight blocks in row-major order and round-trips must be bitwise exact.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ZipOp { Add, Sub, Hadamard };

// Throws NumericError if any entry is NaN or Inf.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

// Checked wrappers around Eigen. Shape mismatches throw ShapeError naming
// both shapes; NaN/Inf inputs throw NumericError instead of propagating.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transposed(const Matrix& a);
Matrix zip_map(const Matrix& a, const Matrix& b, ZipOp op);
Matrix scale(const Matrix& a, double c);

// Deterministic scalar draws. std::uniform_real_distribution is
// implementation-defined, so transforms are done by hand to keep seeded
// runs bit-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one value per call, no caching, so draw order is obvious.
  double normal(double mean, double sigma);

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aeface

#endif  // AEFACE_MATRIX_HPP_
