#ifndef HMMRED_LEXICAL_HPP
#define HMMRED_LEXICAL_HPP

#include <span>
#include <vector>

#include "hmmred/matrix.hpp"

namespace hmmred {

// Orderings of Y^n used to index Hankel rows and columns.
//   kFirst (flo): first symbol least significant, "00,10,01,11" for m = n = 2.
//   kLast  (llo): first symbol most significant,  "00,01,10,11".
enum class LexKind { kFirst, kLast };

class LexOrder {
 public:
  // Throws kSizeLimit if m^n does not fit in Index.
  LexOrder(LexKind kind, int alphabet_size, int length);

  LexKind kind() const { return kind_; }
  int alphabet_size() const { return m_; }
  int length() const { return n_; }
  Index size() const { return size_; }

  Index encode(std::span<const Symbol> w) const;
  std::vector<Symbol> decode(Index index) const;

  // This order describes strings u of length n-1; the result indexes y·u
  // (prepend) or u·y (append) in the same kind of order at length n.
  Index prepend_index(Symbol y, Index u_index) const;
  Index append_index(Index u_index, Symbol y) const;

 private:
  void check_symbol(Symbol y) const;
  void check_index(Index index) const;

  LexKind kind_;
  int m_;
  int n_;
  Index size_;
};

// m^n, or throws kSizeLimit on overflow.
Index checked_power(int alphabet_size, int length);

}  // namespace hmmred

#endif  // HMMRED_LEXICAL_HPP
