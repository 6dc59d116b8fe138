#ifndef HMMRED_NMF_HPP
#define HMMRED_NMF_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "hmmred/kernels.hpp"
#include "hmmred/matrix.hpp"

// I-divergence nonnegative matrix factorization with the stochasticity
// constraints of HMM factors.
namespace hmmred::nmf {

// Relative slack allowed between consecutive trace values.
inline constexpr double kMonotoneRelativeSlack = 1e-12;
// Absolute slack below which changes are rounding noise in the accumulated sum.
inline constexpr double kMonotoneAbsoluteSlack = 1e-15;

// D(P || Q) = sum P log(P/Q) - P + Q. Returns +inf when some P > 0 meets Q = 0.
double divergence(const Matrix& P, const Matrix& Q);

// Random engine for one (seed, stream) pair. Streams separate the draws of
// different solver stages that share a run seed.
std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0);

// i.i.d. uniform entries on (lower, 1), lower in [0, 1).
Matrix random_positive(Index rows, Index cols, std::mt19937_64& engine, double lower = 0.0);

struct Step1Config {
  int max_iterations = 3000;
  std::uint64_t seed = 0;
  // Explicit initial factors; both or neither. Normalized like random ones.
  std::optional<Matrix> initial_left;
  std::optional<Matrix> initial_right;
  // Random entries are drawn from (init_lower, 1). Entries near zero put the
  // multiplicative updates on long plateaus.
  double init_lower = 0.5;
  // Stop early once the relative decrease of one iteration falls below this.
  std::optional<double> tolerance;
  kernels::Backend backend = kernels::Backend::kParallel;
};

struct Step2Config {
  int max_iterations = 3000;
  std::uint64_t seed = 0;
  std::optional<Matrix> initial;  // N x mN, rows normalized before use
  double init_lower = 0.0;        // random entries from (init_lower, 1)
  std::optional<double> tolerance;
  // Iterations at which the iterate is copied into the snapshots (0 = initial).
  std::vector<int> checkpoints;
  kernels::Backend backend = kernels::Backend::kParallel;
};

// Factor pair of an H ~ Pi Gamma run.
struct FactorState {
  Matrix left;   // Pi, m^n x N
  Matrix right;  // Gamma, N x m^n, rows sum to one
  int iterations = 0;
  double initial_divergence = 0.0;  // after constraint normalization of the init
  std::vector<double> trace;        // one value per completed iteration
};

// Parameter matrix M = [M(0), ..., M(m-1)] of a single-factor run.
struct ParameterState {
  Matrix m_concat;  // N x mN, rows sum to one
  int iterations = 0;
  double initial_divergence = 0.0;
  std::vector<double> trace;
  double max_constraint_drift = 0.0;  // max |row sum - 1| seen over the run
  std::vector<std::pair<int, Matrix>> snapshots;
};

// Pi and Gamma as in Step1Config::initial_*, after normalization:
// Gamma rows to one, Pi total mass to one.
std::pair<Matrix, Matrix> initial_factors(Index ell, Index rank, const Step1Config& cfg);
Matrix initial_parameters(Index states, Index cols, const Step2Config& cfg);

// min D(H || Pi Gamma) subject to e'Pi e = 1 and Gamma e = e.
//
// Each iteration updates Pi, then Gamma, then moves the row sums of Gamma into
// the columns of Pi (Gamma <- D^-1 Gamma, Pi <- Pi D), which leaves Pi Gamma
// unchanged. The Gamma update already matches the column masses of H, so
// e'Pi e stays at sum(H) without an explicit projection.
FactorState step1_factorize(const Matrix& H, int rank, const Step1Config& cfg);

// min D(gamma_star || M gamma_block) subject to M e = e, where gamma_block is
// diag(Gamma_{n-1}, ..., Gamma_{n-1}). With stochastic rows in both inputs
// the plain multiplicative update preserves M e = e.
ParameterState step2_gamma(const Matrix& gamma_star, const Matrix& gamma_block,
                           const Step2Config& cfg);

// min D(pi_tilde_star || pi_prev_star M) subject to M e = e. Rows of M are
// renormalized after every update.
ParameterState step2_pi(const Matrix& pi_tilde_star, const Matrix& pi_prev_star,
                        const Step2Config& cfg);

}  // namespace hmmred::nmf

#endif  // HMMRED_NMF_HPP
