#include "hmmred/hmm.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hmmred/error.hpp"

namespace hmmred {
namespace {

void require_nonnegative_finite(const Matrix& matrix, const std::string& name) {
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      const double v = matrix(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << name << " entry (" << r << ", " << c << ") = " << v
            << " is not a finite nonnegative number";
        throw Error(ErrorKind::kValidation, msg.str());
      }
    }
  }
}

void check_symbol(const HmmModel& model, Symbol y) {
  if (y < 0 || y >= model.alphabet_size()) {
    throw Error(ErrorKind::kDomain, "symbol " + std::to_string(y) +
                                        " outside alphabet of size " +
                                        std::to_string(model.alphabet_size()));
  }
}

}  // namespace

void require_row_stochastic(const Matrix& matrix, const char* name, double tolerance) {
  require_nonnegative_finite(matrix, name);
  for (Index r = 0; r < matrix.rows(); ++r) {
    const double sum = matrix.row(r).sum();
    if (std::abs(sum - 1.0) > tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << name << " row " << r << " sums to " << sum << ", not 1";
      throw Error(ErrorKind::kValidation, msg.str());
    }
  }
}

Matrix renormalize_rows(const Matrix& matrix, const char* name, double max_deviation) {
  require_nonnegative_finite(matrix, name);
  Matrix out = matrix;
  for (Index r = 0; r < out.rows(); ++r) {
    const double sum = out.row(r).sum();
    const double deviation = std::abs(sum - 1.0);
    if (deviation <= kStochasticTolerance) continue;
    if (deviation > max_deviation) {
      std::ostringstream msg;
      msg.precision(17);
      msg << name << " row " << r << " sums to " << sum << ", not 1";
      throw Error(ErrorKind::kValidation, msg.str());
    }
    out.row(r) /= sum;
  }
  return out;
}

HmmModel::HmmModel(std::vector<Matrix> M, RowVector pi) : M_(std::move(M)), pi_(std::move(pi)) {
  if (M_.empty()) throw Error(ErrorKind::kValidation, "alphabet must contain at least one symbol");
  const Index n = M_.front().rows();
  if (n < 1) throw Error(ErrorKind::kValidation, "state space must be nonempty");
  for (std::size_t y = 0; y < M_.size(); ++y) {
    if (M_[y].rows() != n || M_[y].cols() != n) {
      throw Error(ErrorKind::kShape, "M(" + std::to_string(y) + ") is not " + std::to_string(n) +
                                         "x" + std::to_string(n));
    }
    require_nonnegative_finite(M_[y], "M(" + std::to_string(y) + ")");
  }
  const Matrix A = transition();
  require_row_stochastic(A, "A = sum_y M(y)");

  if (pi_.size() != n) {
    throw Error(ErrorKind::kShape, "pi has length " + std::to_string(pi_.size()) + ", expected " +
                                       std::to_string(n));
  }
  Matrix pi_as_matrix = pi_;
  require_nonnegative_finite(pi_as_matrix, "pi");
  if (std::abs(pi_.sum() - 1.0) > kStochasticTolerance) {
    throw Error(ErrorKind::kValidation, "pi does not sum to 1");
  }
  const double residual = (pi_ * A - pi_).cwiseAbs().maxCoeff();
  if (residual > kStationarityTolerance) {
    std::ostringstream msg;
    msg << "pi is not stationary for A (max residual " << residual << ")";
    throw Error(ErrorKind::kValidation, msg.str());
  }
}

HmmModel HmmModel::from_matrices(std::vector<Matrix> M) {
  if (M.empty()) throw Error(ErrorKind::kValidation, "alphabet must contain at least one symbol");
  Matrix A = Matrix::Zero(M.front().rows(), M.front().cols());
  for (const auto& block : M) {
    if (block.rows() != A.rows() || block.cols() != A.cols()) {
      throw Error(ErrorKind::kShape, "M(y) blocks differ in shape");
    }
    A += block;
  }
  require_row_stochastic(A, "A = sum_y M(y)");
  RowVector pi = stationary_vector(A);
  return HmmModel(std::move(M), std::move(pi));
}

Matrix HmmModel::transition() const {
  Matrix A = Matrix::Zero(M_.front().rows(), M_.front().cols());
  for (const auto& block : M_) A += block;
  return A;
}

Matrix HmmModel::concatenated() const {
  const Index n = state_size();
  Matrix out(n, n * alphabet_size());
  for (int y = 0; y < alphabet_size(); ++y) out.middleCols(y * n, n) = M_[y];
  return out;
}

HmmModel model_from_ab(const AbSpec& spec) {
  require_row_stochastic(spec.A, "A");
  require_row_stochastic(spec.B, "B");
  if (spec.A.rows() != spec.A.cols()) throw Error(ErrorKind::kShape, "A must be square");
  if (spec.B.rows() != spec.A.rows()) {
    throw Error(ErrorKind::kShape, "B must have one row per state");
  }
  std::vector<Matrix> M;
  M.reserve(spec.B.cols());
  for (Index y = 0; y < spec.B.cols(); ++y) {
    M.emplace_back(spec.A * spec.B.col(y).asDiagonal());
  }
  return HmmModel::from_matrices(std::move(M));
}

RowVector stationary_vector(const Matrix& A) {
  const Index n = A.rows();
  if (n < 1 || A.cols() != n) throw Error(ErrorKind::kShape, "transition matrix must be square");
  require_row_stochastic(A, "A");

  const Eigen::MatrixXd generator = A.transpose() - Eigen::MatrixXd::Identity(n, n);
  // Absolute cutoff: generator entries are O(1), and a relative one would
  // call a 1 x 1 rounding residue full rank.
  const Eigen::VectorXd singular = Eigen::JacobiSVD<Eigen::MatrixXd>(generator).singularValues();
  const Index nullity = (singular.array() <= 1e-10).count();
  if (nullity != 1) {
    throw Error(ErrorKind::kReducibility,
                "stationary vector is not unique: null space of (A^T - I) has dimension " +
                    std::to_string(nullity));
  }

  // Replace the last (redundant) balance equation by the normalization.
  Eigen::MatrixXd system = generator;
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd x = system.fullPivLu().solve(rhs);

  RowVector pi = x.transpose();
  for (Index i = 0; i < n; ++i) {
    if (pi(i) < 0.0) {
      if (pi(i) < -1e-12) {
        throw Error(ErrorKind::kReducibility, "stationary solve produced a negative entry");
      }
      pi(i) = 0.0;
    }
  }
  pi /= pi.sum();
  return pi;
}

HmmModel model_from_concatenated(const Matrix& m_concat, int alphabet_size) {
  const Index n = m_concat.rows();
  if (alphabet_size < 1 || m_concat.cols() != n * alphabet_size) {
    throw Error(ErrorKind::kShape, "concatenated parameter matrix must be N x mN");
  }
  std::vector<Matrix> M;
  M.reserve(alphabet_size);
  for (int y = 0; y < alphabet_size; ++y) M.emplace_back(m_concat.middleCols(y * n, n));
  return HmmModel::from_matrices(std::move(M));
}

RowVector forward_vector(const HmmModel& model, std::span<const Symbol> u) {
  RowVector row = model.stationary();
  for (Symbol y : u) {
    check_symbol(model, y);
    row = row * model.emission_transition(y);
  }
  return row;
}

ColVector backward_vector(const HmmModel& model, std::span<const Symbol> v) {
  ColVector col = ColVector::Ones(model.state_size());
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    check_symbol(model, *it);
    col = model.emission_transition(*it) * col;
  }
  return col;
}

double string_probability(const HmmModel& model, std::span<const Symbol> w) {
  return forward_vector(model, w).sum();
}

}  // namespace hmmred
