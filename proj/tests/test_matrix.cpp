#include <doctest.h>

#include <limits>

#include "aeface/matrix.hpp"

using namespace aeface;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-2.0, 2.0);
  }
  return m;
}

}  // namespace

TEST_CASE("matmul with identity reproduces the operand") {
  Matrix b(2, 2);
  b << 3, 4, 5, 6;
  const Matrix result = matmul(Matrix::Identity(2, 2), b);
  CHECK(result == b);
  CHECK(matmul(b, Matrix::Identity(2, 2)) == b);
}

TEST_CASE("matmul against hand multiplication") {
  Matrix a(2, 2), b(2, 1);
  a << 1, 2, 3, 4;
  b << 5, 6;
  const Matrix c = matmul(a, b);
  CHECK(c(0, 0) == 17.0);
  CHECK(c(1, 0) == 39.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  CHECK_THROWS_AS(matmul(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), ShapeError);
}

TEST_CASE("matmul rejects non-finite input") {
  Matrix a = Matrix::Ones(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(matmul(a, Matrix::Ones(2, 2)), NumericError);
  a(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(matmul(Matrix::Ones(2, 2), a), NumericError);
}

TEST_CASE("transpose swaps entries and round-trips") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const Matrix t = transposed(a);
  CHECK(t(0, 1) == 3.0);
  CHECK(t(1, 0) == 2.0);

  Matrix row(1, 4);
  row << 1, 2, 3, 4;
  CHECK(transposed(row).rows() == 4);
  CHECK(transposed(row).cols() == 1);

  Rng rng(11);
  const Matrix r = random_matrix(5, 7, rng);
  CHECK(transposed(transposed(r)) == r);
}

TEST_CASE("zip_map elementwise ops") {
  Matrix a(1, 2), b(1, 2);
  a << 1, 1;
  b << 2, 3;
  const Matrix sum = zip_map(a, b, ZipOp::Add);
  CHECK(sum(0, 0) == 3.0);
  CHECK(sum(0, 1) == 4.0);

  Rng rng(3);
  const Matrix r = random_matrix(3, 4, rng);
  CHECK(zip_map(r, Matrix::Ones(3, 4), ZipOp::Hadamard) == r);

  CHECK_THROWS_AS(zip_map(a, Matrix::Zero(2, 2), ZipOp::Sub), ShapeError);
}

TEST_CASE("scale multiplies every entry") {
  Matrix a(1, 2);
  a << 2, -4;
  const Matrix s = scale(a, 0.5);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 1) == -2.0);
}

TEST_CASE("transpose distributes over products") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.next_u64() % 16);
    const auto inner = static_cast<Eigen::Index>(1 + rng.next_u64() % 16);
    const auto cols = static_cast<Eigen::Index>(1 + rng.next_u64() % 16);
    const Matrix a = random_matrix(rows, inner, rng);
    const Matrix b = random_matrix(inner, cols, rng);
    const Matrix lhs = transposed(matmul(a, b));
    const Matrix rhs = matmul(transposed(b), transposed(a));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rng is deterministic per seed") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
  }
}
