#include "hmmred/lexical.hpp"

#include <limits>
#include <string>

#include "hmmred/error.hpp"

namespace hmmred {

Index checked_power(int alphabet_size, int length) {
  if (alphabet_size < 1) throw Error(ErrorKind::kDomain, "alphabet size must be positive");
  if (length < 0) throw Error(ErrorKind::kDomain, "string length must be nonnegative");
  Index result = 1;
  for (int i = 0; i < length; ++i) {
    if (result > std::numeric_limits<Index>::max() / alphabet_size) {
      throw Error(ErrorKind::kSizeLimit, std::to_string(alphabet_size) + "^" +
                                             std::to_string(length) +
                                             " overflows the index width");
    }
    result *= alphabet_size;
  }
  return result;
}

LexOrder::LexOrder(LexKind kind, int alphabet_size, int length)
    : kind_(kind), m_(alphabet_size), n_(length), size_(checked_power(alphabet_size, length)) {}

void LexOrder::check_symbol(Symbol y) const {
  if (y < 0 || y >= m_) {
    throw Error(ErrorKind::kDomain,
                "symbol " + std::to_string(y) + " outside alphabet of size " + std::to_string(m_));
  }
}

void LexOrder::check_index(Index index) const {
  if (index < 0 || index >= size_) {
    throw Error(ErrorKind::kDomain, "index " + std::to_string(index) + " outside [0, " +
                                        std::to_string(size_) + ")");
  }
}

Index LexOrder::encode(std::span<const Symbol> w) const {
  if (static_cast<int>(w.size()) != n_) {
    throw Error(ErrorKind::kDomain, "string of length " + std::to_string(w.size()) +
                                        " in an order of length " + std::to_string(n_));
  }
  Index index = 0;
  if (kind_ == LexKind::kFirst) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      check_symbol(*it);
      index = index * m_ + *it;
    }
  } else {
    for (Symbol y : w) {
      check_symbol(y);
      index = index * m_ + y;
    }
  }
  return index;
}

std::vector<Symbol> LexOrder::decode(Index index) const {
  check_index(index);
  std::vector<Symbol> w(n_);
  for (int t = 0; t < n_; ++t) {
    const auto digit = static_cast<Symbol>(index % m_);
    index /= m_;
    if (kind_ == LexKind::kFirst) {
      w[t] = digit;
    } else {
      w[n_ - 1 - t] = digit;
    }
  }
  return w;
}

Index LexOrder::prepend_index(Symbol y, Index u_index) const {
  check_symbol(y);
  check_index(u_index);
  checked_power(m_, n_ + 1);
  if (kind_ == LexKind::kFirst) return y + static_cast<Index>(m_) * u_index;
  return static_cast<Index>(y) * size_ + u_index;
}

Index LexOrder::append_index(Index u_index, Symbol y) const {
  check_symbol(y);
  check_index(u_index);
  checked_power(m_, n_ + 1);
  if (kind_ == LexKind::kFirst) return u_index + static_cast<Index>(y) * size_;
  return static_cast<Index>(m_) * u_index + y;
}

}  // namespace hmmred
