#ifndef HMMRED_HANKEL_HPP
#define HMMRED_HANKEL_HPP

#include <functional>
#include <span>

#include "hmmred/hmm.hpp"
#include "hmmred/matrix.hpp"

namespace hmmred {

// Dense Hankel matrices larger than this many entries are refused.
inline constexpr Index kDefaultMaxHankelEntries = Index{1} << 20;

// The pseudo-Hankel matrix H(r, s) = p(u_r v_s) of half-length n together
// with its factors H = Pi * Gamma.
//   rows u_r in first-lexical order, Pi row r = pi M(u_r);
//   columns v_s in last-lexical order, Gamma column s = M(v_s) e.
struct HankelSystem {
  int alphabet_size = 0;
  int half_length = 0;
  Matrix H;      // m^n x m^n
  Matrix Pi;     // m^n x N
  Matrix Gamma;  // N x m^n
};

// Forward recursion from pi and backward recursion from e, then H = Pi Gamma.
HankelSystem build_factors(const HmmModel& model, int half_length,
                           Index max_entries = kDefaultMaxHankelEntries);

using StringDistribution = std::function<double(std::span<const Symbol>)>;

// H(r, s) = dist(u_r v_s). The length-2n values must form a distribution
// (nonnegative, summing to 1 within 1e-8).
Matrix hankel_from_oracle(const StringDistribution& dist, int alphabet_size, int half_length,
                          Index max_entries = kDefaultMaxHankelEntries);

// Row u of the result is the sum over y of the rows for y·u.
Matrix marginalize_pi(const Matrix& pi_n, int alphabet_size);

// Column v of the result is the sum over y of the columns for v·y.
Matrix marginalize_gamma(const Matrix& gamma_n, int alphabet_size);

// diag(Gamma, ..., Gamma) with m copies.
Matrix block_diag_gamma(const Matrix& gamma, int alphabet_size,
                        Index max_entries = kDefaultMaxHankelEntries);

// [Pi_{n-1} M(0), ..., Pi_{n-1} M(m-1)] read off Pi_n: block y at row u holds
// the row for u·y. A pure reindexing.
Matrix repackage_pi_tilde(const Matrix& pi_n, int alphabet_size);

// Exponent k with m^k == count; throws kShape otherwise.
int power_exponent(Index count, int alphabet_size);

}  // namespace hmmred

#endif  // HMMRED_HANKEL_HPP
