#include "aeface/matrix.hpp"

#include <cmath>
#include <string>

namespace aeface {
namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entry in " +
                       shape_of(m) + " matrix");
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entry in vector of size " +
                       std::to_string(v.size()));
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_of(a) +
                     " vs " + shape_of(b));
  }
  require_finite(a, "matmul lhs");
  require_finite(b, "matmul rhs");
  return a * b;
}

Matrix transposed(const Matrix& a) {
  require_finite(a, "transpose");
  return a.transpose();
}

Matrix zip_map(const Matrix& a, const Matrix& b, ZipOp op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("zip_map: shapes differ, " + shape_of(a) + " vs " +
                     shape_of(b));
  }
  require_finite(a, "zip_map lhs");
  require_finite(b, "zip_map rhs");
  switch (op) {
    case ZipOp::Add:
      return a + b;
    case ZipOp::Sub:
      return a - b;
    case ZipOp::Hadamard:
      return a.cwiseProduct(b);
  }
  throw ConfigError("zip_map: unknown op");
}

Matrix scale(const Matrix& a, double c) {
  require_finite(a, "scale");
  if (!std::isfinite(c)) throw NumericError("scale: non-finite scalar");
  return a * c;
}

double Rng::normal(double mean, double sigma) {
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + sigma * r * std::cos(2.0 * M_PI * u2);
}

}  // namespace aeface
