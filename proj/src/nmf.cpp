#include "hmmred/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "hmmred/error.hpp"

namespace hmmred::nmf {
namespace {

void require_nonnegative(const Matrix& matrix, const char* name) {
  for (Index r = 0; r < matrix.rows(); ++r) {
    for (Index c = 0; c < matrix.cols(); ++c) {
      const double v = matrix(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << name << " entry (" << r << ", " << c << ") = " << v << " is not nonnegative";
        throw Error(ErrorKind::kInput, msg.str());
      }
    }
  }
}

void require_rows_sum_to_one(const Matrix& matrix, const char* name, double tolerance) {
  for (Index r = 0; r < matrix.rows(); ++r) {
    const double sum = matrix.row(r).sum();
    if (std::abs(sum - 1.0) > tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << name << " row " << r << " sums to " << sum << ", expected 1";
      throw Error(ErrorKind::kInput, msg.str());
    }
  }
}

void normalize_rows(Matrix& matrix) {
  for (Index r = 0; r < matrix.rows(); ++r) matrix.row(r) /= matrix.row(r).sum();
}

double max_row_drift(const Matrix& matrix) {
  double drift = 0.0;
  for (Index r = 0; r < matrix.rows(); ++r) {
    drift = std::max(drift, std::abs(matrix.row(r).sum() - 1.0));
  }
  return drift;
}

void require_monotone(double previous, double current, int iteration, const char* solver) {
  if (current <= previous * (1.0 + kMonotoneRelativeSlack) + kMonotoneAbsoluteSlack) return;
  std::ostringstream msg;
  msg.precision(17);
  msg << solver << ": divergence increased at iteration " << iteration << " from " << previous
      << " to " << current << " (relative change " << (current - previous) / previous << ")";
  throw Error(ErrorKind::kConsistency, msg.str());
}

bool converged(double previous, double current, const std::optional<double>& tolerance) {
  return tolerance && previous - current <= *tolerance * previous;
}

void require_iterations(int max_iterations) {
  if (max_iterations < 1) throw Error(ErrorKind::kValidation, "max_iterations must be at least 1");
}

// Copies the iterate at the configured iterations (ascending order).
class CheckpointRecorder {
 public:
  CheckpointRecorder(const std::vector<int>& checkpoints,
                     std::vector<std::pair<int, Matrix>>& out)
      : checkpoints_(checkpoints), out_(out) {}

  void offer(int iteration, const Matrix& iterate) {
    while (next_ < checkpoints_.size() && checkpoints_[next_] < iteration) ++next_;
    if (next_ < checkpoints_.size() && checkpoints_[next_] == iteration) {
      out_.emplace_back(iteration, iterate);
      ++next_;
    }
  }

 private:
  const std::vector<int>& checkpoints_;
  std::vector<std::pair<int, Matrix>>& out_;
  std::size_t next_ = 0;
};

}  // namespace

double divergence(const Matrix& P, const Matrix& Q) {
  return kernels::serial::divergence(P, Q);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Matrix random_positive(Index rows, Index cols, std::mt19937_64& engine, double lower) {
  if (!(lower >= 0.0 && lower < 1.0)) {
    throw Error(ErrorKind::kValidation, "random init lower bound must lie in [0, 1)");
  }
  std::uniform_real_distribution<double> uniform(lower, 1.0);
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double v = 0.0;
      while (v <= lower) v = uniform(engine);
      out(r, c) = v;
    }
  }
  return out;
}

std::pair<Matrix, Matrix> initial_factors(Index ell, Index rank, const Step1Config& cfg) {
  Matrix left;
  Matrix right;
  if (cfg.initial_left.has_value() != cfg.initial_right.has_value()) {
    throw Error(ErrorKind::kValidation, "explicit Step-1 init needs both factors");
  }
  if (cfg.initial_left) {
    left = *cfg.initial_left;
    right = *cfg.initial_right;
    if (left.rows() != ell || left.cols() != rank || right.rows() != rank || right.cols() != ell) {
      throw Error(ErrorKind::kShape, "explicit Step-1 init has the wrong shape");
    }
    require_nonnegative(left, "initial Pi");
    require_nonnegative(right, "initial Gamma");
  } else {
    auto engine = make_engine(cfg.seed, 1);
    left = random_positive(ell, rank, engine, cfg.init_lower);
    right = random_positive(rank, ell, engine, cfg.init_lower);
  }
  normalize_rows(right);
  left /= left.sum();
  return {std::move(left), std::move(right)};
}

Matrix initial_parameters(Index states, Index cols, const Step2Config& cfg) {
  Matrix M;
  if (cfg.initial) {
    M = *cfg.initial;
    if (M.rows() != states || M.cols() != cols) {
      throw Error(ErrorKind::kShape, "explicit Step-2 init has the wrong shape");
    }
    require_nonnegative(M, "initial M");
  } else {
    auto engine = make_engine(cfg.seed, 2);
    M = random_positive(states, cols, engine, cfg.init_lower);
  }
  normalize_rows(M);
  return M;
}

FactorState step1_factorize(const Matrix& H, int rank, const Step1Config& cfg) {
  require_iterations(cfg.max_iterations);
  if (rank < 1) throw Error(ErrorKind::kValidation, "target size must be at least 1");
  if (H.rows() < 1 || H.cols() < 1) throw Error(ErrorKind::kShape, "empty Hankel matrix");
  require_nonnegative(H, "H");
  const double mass = H.sum();
  if (std::abs(mass - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "Hankel matrix sums to " << mass << ", expected 1";
    throw Error(ErrorKind::kInput, msg.str());
  }

  const auto backend = cfg.backend;
  FactorState state;
  std::tie(state.left, state.right) = initial_factors(H.rows(), rank, cfg);
  Matrix& Pi = state.left;
  Matrix& Gamma = state.right;

  Matrix approx;
  kernels::product(backend, Pi, Gamma, approx);
  state.initial_divergence = kernels::divergence(backend, H, approx);
  state.trace.reserve(cfg.max_iterations);

  double previous = state.initial_divergence;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    kernels::update_left(backend, H, Gamma, approx, Pi);
    kernels::product(backend, Pi, Gamma, approx);
    kernels::update_right(backend, H, Pi, approx, Gamma);

    for (Index a = 0; a < rank; ++a) {
      const double scale = Gamma.row(a).sum();
      Gamma.row(a) /= scale;
      Pi.col(a) *= scale;
    }

    kernels::product(backend, Pi, Gamma, approx);
    const double current = kernels::divergence(backend, H, approx);
    require_monotone(previous, current, it, "step1");
    state.trace.push_back(current);
    state.iterations = it;
    if (converged(previous, current, cfg.tolerance)) break;
    previous = current;
  }

  const double total = Pi.sum();
  if (std::abs(total - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "step1: total mass of Pi is " << total << " after " << state.iterations
        << " iterations";
    throw Error(ErrorKind::kConsistency, msg.str());
  }
  return state;
}

ParameterState step2_gamma(const Matrix& gamma_star, const Matrix& gamma_block,
                           const Step2Config& cfg) {
  require_iterations(cfg.max_iterations);
  const Index states = gamma_star.rows();
  if (states < 1 || gamma_block.cols() != gamma_star.cols() || gamma_block.rows() < states ||
      gamma_block.rows() % states != 0) {
    throw Error(ErrorKind::kShape, "step2_gamma: expected N x l and mN x l inputs");
  }
  require_nonnegative(gamma_star, "Gamma*");
  require_nonnegative(gamma_block, "Gamma block");
  require_rows_sum_to_one(gamma_star, "Gamma*", 1e-8);
  require_rows_sum_to_one(gamma_block, "Gamma block", 1e-8);

  const auto backend = cfg.backend;
  ParameterState state;
  state.m_concat = initial_parameters(states, gamma_block.rows(), cfg);
  Matrix& M = state.m_concat;
  CheckpointRecorder recorder(cfg.checkpoints, state.snapshots);
  recorder.offer(0, M);

  Matrix approx;
  kernels::product(backend, M, gamma_block, approx);
  state.initial_divergence = kernels::divergence(backend, gamma_star, approx);
  state.trace.reserve(cfg.max_iterations);

  double previous = state.initial_divergence;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    kernels::update_left(backend, gamma_star, gamma_block, approx, M, /*divide_by_mass=*/false);
    const double drift = max_row_drift(M);
    state.max_constraint_drift = std::max(state.max_constraint_drift, drift);
    if (drift > 1e-6) {
      std::ostringstream msg;
      msg << "step2_gamma: row sums of M drifted by " << drift << " at iteration " << it;
      throw Error(ErrorKind::kConsistency, msg.str());
    }
    kernels::product(backend, M, gamma_block, approx);
    const double current = kernels::divergence(backend, gamma_star, approx);
    require_monotone(previous, current, it, "step2_gamma");
    state.trace.push_back(current);
    state.iterations = it;
    recorder.offer(it, M);
    if (converged(previous, current, cfg.tolerance)) break;
    previous = current;
  }
  return state;
}

ParameterState step2_pi(const Matrix& pi_tilde_star, const Matrix& pi_prev_star,
                        const Step2Config& cfg) {
  require_iterations(cfg.max_iterations);
  const Index states = pi_prev_star.cols();
  if (states < 1 || pi_tilde_star.rows() != pi_prev_star.rows() ||
      pi_tilde_star.cols() < states || pi_tilde_star.cols() % states != 0) {
    throw Error(ErrorKind::kShape, "step2_pi: expected l' x mN and l' x N inputs");
  }
  require_nonnegative(pi_tilde_star, "Pi tilde*");
  require_nonnegative(pi_prev_star, "Pi*_{n-1}");
  for (Index k = 0; k < states; ++k) {
    if (!(pi_prev_star.col(k).sum() > 0.0)) {
      throw Error(ErrorKind::kDegenerateState,
                  "state " + std::to_string(k) + " has zero mass in Pi*_{n-1}");
    }
  }

  const auto backend = cfg.backend;
  ParameterState state;
  state.m_concat = initial_parameters(states, pi_tilde_star.cols(), cfg);
  Matrix& M = state.m_concat;
  CheckpointRecorder recorder(cfg.checkpoints, state.snapshots);
  recorder.offer(0, M);

  Matrix approx;
  kernels::product(backend, pi_prev_star, M, approx);
  state.initial_divergence = kernels::divergence(backend, pi_tilde_star, approx);
  state.trace.reserve(cfg.max_iterations);

  double previous = state.initial_divergence;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    kernels::update_right(backend, pi_tilde_star, pi_prev_star, approx, M);
    normalize_rows(M);
    state.max_constraint_drift = std::max(state.max_constraint_drift, max_row_drift(M));
    kernels::product(backend, pi_prev_star, M, approx);
    const double current = kernels::divergence(backend, pi_tilde_star, approx);
    require_monotone(previous, current, it, "step2_pi");
    state.trace.push_back(current);
    state.iterations = it;
    recorder.offer(it, M);
    if (converged(previous, current, cfg.tolerance)) break;
    previous = current;
  }
  return state;
}

}  // namespace hmmred::nmf
