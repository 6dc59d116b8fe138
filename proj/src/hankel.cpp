#include "hmmred/hankel.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "hmmred/error.hpp"
#include "hmmred/lexical.hpp"

namespace hmmred {
namespace {

void require_within_cap(Index rows, Index cols, Index max_entries) {
  if (cols != 0 && rows > max_entries / cols) {
    throw Error(ErrorKind::kSizeLimit, "dense " + std::to_string(rows) + "x" +
                                           std::to_string(cols) + " matrix exceeds the cap of " +
                                           std::to_string(max_entries) + " entries");
  }
}

}  // namespace

int power_exponent(Index count, int alphabet_size) {
  if (alphabet_size < 1 || count < 1) throw Error(ErrorKind::kShape, "empty dimension");
  if (alphabet_size == 1) {
    if (count != 1) throw Error(ErrorKind::kShape, "dimension is not a power of 1");
    return 1;
  }
  int k = 0;
  Index p = 1;
  while (p < count) {
    p *= alphabet_size;
    ++k;
  }
  if (p != count) {
    throw Error(ErrorKind::kShape, "dimension " + std::to_string(count) + " is not a power of " +
                                       std::to_string(alphabet_size));
  }
  return k;
}

HankelSystem build_factors(const HmmModel& model, int half_length, Index max_entries) {
  if (half_length < 1) throw Error(ErrorKind::kDomain, "Hankel half-length must be at least 1");
  const int m = model.alphabet_size();
  const Index n_states = model.state_size();
  const Index ell = checked_power(m, half_length);
  require_within_cap(ell, ell, max_entries);

  // Length-0 bases: the stationary row and the all-ones column.
  Matrix pi = model.stationary();
  Matrix gamma = Matrix::Ones(n_states, 1);
  for (int k = 1; k <= half_length; ++k) {
    const Index prev = pi.rows();
    Matrix next_pi(prev * m, n_states);
    Matrix next_gamma(n_states, prev * m);
    for (int y = 0; y < m; ++y) {
      const Matrix& My = model.emission_transition(y);
      next_pi.middleRows(y * prev, prev).noalias() = pi * My;
      next_gamma.middleCols(y * prev, prev).noalias() = My * gamma;
    }
    pi = std::move(next_pi);
    gamma = std::move(next_gamma);
  }

  HankelSystem system;
  system.alphabet_size = m;
  system.half_length = half_length;
  system.H.noalias() = pi * gamma;
  system.Pi = std::move(pi);
  system.Gamma = std::move(gamma);
  return system;
}

Matrix hankel_from_oracle(const StringDistribution& dist, int alphabet_size, int half_length,
                          Index max_entries) {
  if (half_length < 1) throw Error(ErrorKind::kDomain, "Hankel half-length must be at least 1");
  const LexOrder rows(LexKind::kFirst, alphabet_size, half_length);
  const LexOrder cols(LexKind::kLast, alphabet_size, half_length);
  require_within_cap(rows.size(), cols.size(), max_entries);

  Matrix H(rows.size(), cols.size());
  std::vector<Symbol> word(2 * static_cast<std::size_t>(half_length));
  double total = 0.0;
  for (Index r = 0; r < rows.size(); ++r) {
    const auto u = rows.decode(r);
    std::copy(u.begin(), u.end(), word.begin());
    for (Index s = 0; s < cols.size(); ++s) {
      const auto v = cols.decode(s);
      std::copy(v.begin(), v.end(), word.begin() + half_length);
      const double p = dist(word);
      if (!std::isfinite(p) || p < 0.0) {
        std::ostringstream msg;
        msg << "distribution value " << p << " at Hankel entry (" << r << ", " << s
            << ") is not a probability";
        throw Error(ErrorKind::kInput, msg.str());
      }
      H(r, s) = p;
      total += p;
    }
  }
  if (std::abs(total - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "length-" << 2 * half_length << " distribution sums to " << total
        << " (deviation " << total - 1.0 << ")";
    throw Error(ErrorKind::kInput, msg.str());
  }
  return H;
}

Matrix marginalize_pi(const Matrix& pi_n, int alphabet_size) {
  const int n = power_exponent(pi_n.rows(), alphabet_size);
  if (n < 1) throw Error(ErrorKind::kShape, "cannot marginalize a length-0 factor");
  const LexOrder shorter(LexKind::kFirst, alphabet_size, n - 1);
  Matrix out = Matrix::Zero(shorter.size(), pi_n.cols());
  for (Index u = 0; u < shorter.size(); ++u) {
    for (Symbol y = 0; y < alphabet_size; ++y) out.row(u) += pi_n.row(shorter.prepend_index(y, u));
  }
  return out;
}

Matrix marginalize_gamma(const Matrix& gamma_n, int alphabet_size) {
  const int n = power_exponent(gamma_n.cols(), alphabet_size);
  if (n < 1) throw Error(ErrorKind::kShape, "cannot marginalize a length-0 factor");
  const LexOrder shorter(LexKind::kLast, alphabet_size, n - 1);
  Matrix out = Matrix::Zero(gamma_n.rows(), shorter.size());
  for (Index v = 0; v < shorter.size(); ++v) {
    for (Symbol y = 0; y < alphabet_size; ++y) out.col(v) += gamma_n.col(shorter.append_index(v, y));
  }
  return out;
}

Matrix block_diag_gamma(const Matrix& gamma, int alphabet_size, Index max_entries) {
  if (alphabet_size < 1) throw Error(ErrorKind::kShape, "alphabet size must be positive");
  const Index rows = gamma.rows() * alphabet_size;
  const Index cols = gamma.cols() * alphabet_size;
  require_within_cap(rows, cols, max_entries);
  Matrix out = Matrix::Zero(rows, cols);
  for (int y = 0; y < alphabet_size; ++y) {
    out.block(y * gamma.rows(), y * gamma.cols(), gamma.rows(), gamma.cols()) = gamma;
  }
  return out;
}

Matrix repackage_pi_tilde(const Matrix& pi_n, int alphabet_size) {
  const int n = power_exponent(pi_n.rows(), alphabet_size);
  if (n < 1) throw Error(ErrorKind::kShape, "cannot repackage a length-0 factor");
  const LexOrder shorter(LexKind::kFirst, alphabet_size, n - 1);
  const Index states = pi_n.cols();
  Matrix out(shorter.size(), states * alphabet_size);
  for (Index u = 0; u < shorter.size(); ++u) {
    for (Symbol y = 0; y < alphabet_size; ++y) {
      out.block(u, y * states, 1, states) = pi_n.row(shorter.append_index(u, y));
    }
  }
  return out;
}

}  // namespace hmmred
