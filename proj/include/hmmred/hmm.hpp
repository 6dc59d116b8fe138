#ifndef HMMRED_HMM_HPP
#define HMMRED_HMM_HPP

#include <span>
#include <vector>

#include "hmmred/matrix.hpp"

namespace hmmred {

inline constexpr double kStochasticTolerance = 1e-10;
inline constexpr double kStationarityTolerance = 1e-8;

// Transition matrix A and read-out matrix B of an HMM whose output depends
// on the state reached: M(y) = A * diag(B[:, y]).
struct AbSpec {
  Matrix A;  // N x N, row-stochastic
  Matrix B;  // N x m, row-stochastic
};

// Parameters {M(y)} of a stationary HMM with m output symbols and N states,
// M(y)(i, j) = P(Y' = y, X' = j | X = i). Symbols are 0-based.
//
// Instances are validated on construction and immutable afterwards.
class HmmModel {
 public:
  // Validates M and pi against the invariants; throws Error on violation.
  HmmModel(std::vector<Matrix> M, RowVector pi);

  // Computes pi as the unique stationary vector of sum_y M(y).
  static HmmModel from_matrices(std::vector<Matrix> M);

  int alphabet_size() const { return static_cast<int>(M_.size()); }
  int state_size() const { return static_cast<int>(pi_.size()); }

  const Matrix& emission_transition(Symbol y) const { return M_.at(y); }
  const std::vector<Matrix>& matrices() const { return M_; }
  const RowVector& stationary() const { return pi_; }

  // A = sum_y M(y).
  Matrix transition() const;

  // [M(0), ..., M(m-1)] as one N x mN matrix.
  Matrix concatenated() const;

 private:
  std::vector<Matrix> M_;
  RowVector pi_;
};

// Checks that every row of `matrix` is nonnegative and sums to one within
// `tolerance`; the error message names the offending row.
void require_row_stochastic(const Matrix& matrix, const char* name,
                            double tolerance = kStochasticTolerance);

// Divides every row by its sum when the deviation from one is at most
// `max_deviation` (e.g. truncated repeating decimals); rows further off are
// rejected. Rows already within kStochasticTolerance are left untouched.
Matrix renormalize_rows(const Matrix& matrix, const char* name,
                        double max_deviation = 1e-6);

HmmModel model_from_ab(const AbSpec& spec);

// Unique pi with pi A = pi, pi e = 1, from a direct linear solve.
RowVector stationary_vector(const Matrix& A);

// Splits an N x mN concatenation [M(0), ..., M(m-1)] into its blocks and
// builds the model with its stationary vector.
HmmModel model_from_concatenated(const Matrix& m_concat, int alphabet_size);

// pi M(w_1) ... M(w_n) e; the empty string has probability one.
double string_probability(const HmmModel& model, std::span<const Symbol> w);

// pi(u) = pi M(u) and gamma(v) = M(v) e.
RowVector forward_vector(const HmmModel& model, std::span<const Symbol> u);
ColVector backward_vector(const HmmModel& model, std::span<const Symbol> v);

}  // namespace hmmred

#endif  // HMMRED_HMM_HPP
