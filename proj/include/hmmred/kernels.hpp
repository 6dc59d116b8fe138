#ifndef HMMRED_KERNELS_HPP
#define HMMRED_KERNELS_HPP

#include <algorithm>
#include <limits>

#include "hmmred/matrix.hpp"

// Dense kernels behind the multiplicative-update solvers.
//
// Two implementations with identical signatures: `serial` is the reference,
// `parallel` splits the outer loops across OpenMP threads. Every output entry
// is accumulated by exactly one thread in the same order as the reference, so
// both produce bitwise-identical results for any thread count.
namespace hmmred::kernels {

// Entries are never driven below this by an update.
inline constexpr double kPositivityFloor = 1e-300;

// p log(p/q) - p + q, with 0 log 0 = 0 and +inf when p > 0 = q. Accurate to a
// few ulps even when p and q nearly coincide.
double divergence_term(double p, double q);

// target / approx in the multiplicative updates. An approximation that
// underflowed to zero is read as the smallest normal double, so the ratio
// stays finite.
inline double update_ratio(double target, double approx) {
  return target == 0.0 ? 0.0 : target / std::max(approx, std::numeric_limits<double>::min());
}

enum class Backend { kSerial, kParallel };

namespace serial {

// out = left * right
void product(const Matrix& left, const Matrix& right, Matrix& out);

// Sum of divergence_term over entries (shapes must agree).
double divergence(const Matrix& target, const Matrix& approx);

// left(r,a) *= [sum_s right(a,s) target(r,s)/approx(r,s)] / [sum_s right(a,s)]
// where approx = left * right. The denominator is skipped when
// `divide_by_mass` is false.
void update_left(const Matrix& target, const Matrix& right, const Matrix& approx, Matrix& left,
                 bool divide_by_mass = true);

// right(a,s) *= [sum_r left(r,a) target(r,s)/approx(r,s)] / [sum_r left(r,a)]
void update_right(const Matrix& target, const Matrix& left, const Matrix& approx, Matrix& right,
                  bool divide_by_mass = true);

}  // namespace serial

namespace parallel {

void product(const Matrix& left, const Matrix& right, Matrix& out);
double divergence(const Matrix& target, const Matrix& approx);
void update_left(const Matrix& target, const Matrix& right, const Matrix& approx, Matrix& left,
                 bool divide_by_mass = true);
void update_right(const Matrix& target, const Matrix& left, const Matrix& approx, Matrix& right,
                  bool divide_by_mass = true);

}  // namespace parallel

// Backend-dispatched entry points used by the solvers.
void product(Backend backend, const Matrix& left, const Matrix& right, Matrix& out);
double divergence(Backend backend, const Matrix& target, const Matrix& approx);
void update_left(Backend backend, const Matrix& target, const Matrix& right, const Matrix& approx,
                 Matrix& left, bool divide_by_mass = true);
void update_right(Backend backend, const Matrix& target, const Matrix& left, const Matrix& approx,
                  Matrix& right, bool divide_by_mass = true);

}  // namespace hmmred::kernels

#endif  // HMMRED_KERNELS_HPP
