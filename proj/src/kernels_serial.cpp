#include <cmath>
#include <limits>
#include <vector>

#include "hmmred/error.hpp"
#include "hmmred/kernels.hpp"

namespace hmmred::kernels {

double divergence_term(double p, double q) {
  if (p == 0.0) return q;
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  // q * phi(d) with phi(d) = (1+d) log(1+d) - d and d = p/q - 1.
  const double d = (p - q) / q;
  if (std::abs(d) < 0.05) {
    // phi(d) = sum_{k>=2} (-d)^k / (k (k-1))
    const double x = -d;
    double power = x * x;
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      const double term = power / (static_cast<double>(k) * (k - 1));
      sum += term;
      if (std::abs(term) <= 1e-18 * sum) break;
      power *= x;
    }
    return q * sum;
  }
  // Far from p = q there is no cancellation; the direct form also avoids
  // 1 + d rounding to zero (p << q) and d overflowing (p >> q).
  if (d < -0.5 || d > 1e8) {
    const double r = p / q;
    const double log_ratio =
        r > 0.0 && std::isfinite(r) ? std::log(r) : std::log(p) - std::log(q);
    return p * log_ratio - p + q;
  }
  return q * ((1.0 + d) * std::log1p(d) - d);
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kShape, std::string(what) + ": shape mismatch");
  }
}

}  // namespace

namespace serial {

void product(const Matrix& left, const Matrix& right, Matrix& out) {
  if (left.cols() != right.rows()) throw Error(ErrorKind::kShape, "product: inner dimensions");
  out.setZero(left.rows(), right.cols());
  for (Index i = 0; i < left.rows(); ++i) {
    for (Index k = 0; k < left.cols(); ++k) {
      const double a = left(i, k);
      for (Index j = 0; j < right.cols(); ++j) out(i, j) += a * right(k, j);
    }
  }
}

double divergence(const Matrix& target, const Matrix& approx) {
  require_same_shape(target, approx, "divergence");
  std::vector<double> row_sums(target.rows(), 0.0);
  for (Index r = 0; r < target.rows(); ++r) {
    double s = 0.0;
    for (Index c = 0; c < target.cols(); ++c) s += divergence_term(target(r, c), approx(r, c));
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
  std::vector<double> mass(rank, 0.0);
  for (Index a = 0; a < rank; ++a) {
    for (Index s = 0; s < right.cols(); ++s) mass[a] += right(a, s);
  }
  std::vector<double> numer(rank);
  for (Index r = 0; r < left.rows(); ++r) {
    std::fill(numer.begin(), numer.end(), 0.0);
    for (Index s = 0; s < target.cols(); ++s) {
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

void update_right(const Matrix& target, const Matrix& left, const Matrix& approx, Matrix& right,
                  bool divide_by_mass) {
  require_same_shape(target, approx, "update_right");
  const Index rank = right.rows();
  std::vector<double> mass(rank, 0.0);
  for (Index r = 0; r < left.rows(); ++r) {
    for (Index a = 0; a < rank; ++a) mass[a] += left(r, a);
  }
  Matrix numer = Matrix::Zero(rank, right.cols());
  for (Index r = 0; r < target.rows(); ++r) {
    for (Index s = 0; s < target.cols(); ++s) {
      const double w = update_ratio(target(r, s), approx(r, s));
      for (Index a = 0; a < rank; ++a) numer(a, s) += left(r, a) * w;
    }
  }
  for (Index a = 0; a < rank; ++a) {
    for (Index s = 0; s < right.cols(); ++s) {
      double factor = numer(a, s);
      if (divide_by_mass) factor /= mass[a];
      right(a, s) = std::max(right(a, s) * factor, kPositivityFloor);
    }
  }
}

}  // namespace serial

void product(Backend backend, const Matrix& left, const Matrix& right, Matrix& out) {
  if (backend == Backend::kParallel) return parallel::product(left, right, out);
  serial::product(left, right, out);
}

double divergence(Backend backend, const Matrix& target, const Matrix& approx) {
  if (backend == Backend::kParallel) return parallel::divergence(target, approx);
  return serial::divergence(target, approx);
}

void update_left(Backend backend, const Matrix& target, const Matrix& right, const Matrix& approx,
                 Matrix& left, bool divide_by_mass) {
  if (backend == Backend::kParallel) {
    return parallel::update_left(target, right, approx, left, divide_by_mass);
  }
  serial::update_left(target, right, approx, left, divide_by_mass);
}

void update_right(Backend backend, const Matrix& target, const Matrix& left, const Matrix& approx,
                  Matrix& right, bool divide_by_mass) {
  if (backend == Backend::kParallel) {
    return parallel::update_right(target, left, approx, right, divide_by_mass);
  }
  serial::update_right(target, left, approx, right, divide_by_mass);
}

}  // namespace hmmred::kernels
