#include <algorithm>
#include <vector>

#include "hmmred/error.hpp"
#include "hmmred/kernels.hpp"

namespace hmmred::kernels::parallel {
namespace {

// Below this many output entries the fork/join costs more than the loop.
constexpr Index kMinParallelWork = 1 << 12;
constexpr Index kColumnBlock = 64;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kShape, std::string(what) + ": shape mismatch");
  }
}

}  // namespace

void product(const Matrix& left, const Matrix& right, Matrix& out) {
  if (left.cols() != right.rows()) throw Error(ErrorKind::kShape, "product: inner dimensions");
  out.setZero(left.rows(), right.cols());
  const Index rows = left.rows();
  const Index inner = left.cols();
  const Index cols = right.cols();
#pragma omp parallel for schedule(static) if (rows * cols * inner >= kMinParallelWork)
  for (Index i = 0; i < rows; ++i) {
    double* dst = out.data() + i * cols;
    for (Index k = 0; k < inner; ++k) {
      const double a = left(i, k);
      const double* src = right.data() + k * cols;
      for (Index j = 0; j < cols; ++j) dst[j] += a * src[j];
    }
  }
}

double divergence(const Matrix& target, const Matrix& approx) {
  require_same_shape(target, approx, "divergence");
  const Index rows = target.rows();
  const Index cols = target.cols();
  std::vector<double> row_sums(rows, 0.0);
#pragma omp parallel for schedule(static) if (rows * cols >= kMinParallelWork)
  for (Index r = 0; r < rows; ++r) {
    double s = 0.0;
    for (Index c = 0; c < cols; ++c) s += divergence_term(target(r, c), approx(r, c));
    row_sums[r] = s;
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total;
}

void update_left(const Matrix& target, const Matrix& right, const Matrix& approx, Matrix& left,
                 bool divide_by_mass) {
  require_same_shape(target, approx, "update_left");
  const Index rank = left.cols();
  const Index rows = left.rows();
  const Index cols = target.cols();
  std::vector<double> mass(rank, 0.0);
  for (Index a = 0; a < rank; ++a) {
    for (Index s = 0; s < right.cols(); ++s) mass[a] += right(a, s);
  }
#pragma omp parallel if (rows * cols * rank >= kMinParallelWork)
  {
    std::vector<double> numer(rank);
#pragma omp for schedule(static)
    for (Index r = 0; r < rows; ++r) {
      std::fill(numer.begin(), numer.end(), 0.0);
      for (Index s = 0; s < cols; ++s) {
        const double w = update_ratio(target(r, s), approx(r, s));
        for (Index a = 0; a < rank; ++a) numer[a] += right(a, s) * w;
      }
      for (Index a = 0; a < rank; ++a) {
        double factor = numer[a];
        if (divide_by_mass) factor /= mass[a];
        left(r, a) = std::max(left(r, a) * factor, kPositivityFloor);
      }
    }
  }
}

void update_right(const Matrix& target, const Matrix& left, const Matrix& approx, Matrix& right,
                  bool divide_by_mass) {
  require_same_shape(target, approx, "update_right");
  const Index rank = right.rows();
  const Index rows = target.rows();
  const Index cols = target.cols();
  std::vector<double> mass(rank, 0.0);
  for (Index r = 0; r < left.rows(); ++r) {
    for (Index a = 0; a < rank; ++a) mass[a] += left(r, a);
  }
  Matrix numer = Matrix::Zero(rank, cols);
  const Index blocks = (cols + kColumnBlock - 1) / kColumnBlock;
  // Column blocks are independent; within a block rows are visited in order
  // so each accumulator sees the same sequence as the serial kernel.
#pragma omp parallel for schedule(static) if (rows * cols * rank >= kMinParallelWork)
  for (Index b = 0; b < blocks; ++b) {
    const Index begin = b * kColumnBlock;
    const Index end = std::min(cols, begin + kColumnBlock);
    for (Index r = 0; r < rows; ++r) {
      for (Index s = begin; s < end; ++s) {
        const double w = update_ratio(target(r, s), approx(r, s));
        for (Index a = 0; a < rank; ++a) numer(a, s) += left(r, a) * w;
      }
    }
    for (Index a = 0; a < rank; ++a) {
      for (Index s = begin; s < end; ++s) {
        double factor = numer(a, s);
        if (divide_by_mass) factor /= mass[a];
        right(a, s) = std::max(right(a, s) * factor, kPositivityFloor);
      }
    }
  }
}

}  // namespace hmmred::kernels::parallel
