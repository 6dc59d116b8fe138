#include <doctest.h>

#include <limits>
#include <set>
#include <vector>

#include "hmmred/error.hpp"
#include "hmmred/lexical.hpp"
#include "support/oracles.hpp"

using namespace hmmred;
using hmmred::testing::all_strings;
using hmmred::testing::flo_index;
using hmmred::testing::llo_index;

namespace {

std::vector<Symbol> w(std::initializer_list<Symbol> symbols) { return symbols; }

bool raises(ErrorKind kind, const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_CASE("two-symbol orders at length two") {
  const LexOrder flo(LexKind::kFirst, 2, 2);
  const LexOrder llo(LexKind::kLast, 2, 2);
  CHECK(flo.encode(w({0, 0})) == 0);
  CHECK(flo.encode(w({1, 0})) == 1);
  CHECK(flo.encode(w({0, 1})) == 2);
  CHECK(flo.encode(w({1, 1})) == 3);
  CHECK(llo.encode(w({0, 0})) == 0);
  CHECK(llo.encode(w({0, 1})) == 1);
  CHECK(llo.encode(w({1, 0})) == 2);
  CHECK(llo.encode(w({1, 1})) == 3);
  CHECK(flo.decode(1) == w({1, 0}));
  CHECK(LexOrder(LexKind::kLast, 3, 1).decode(2) == w({2}));
}

TEST_CASE("single symbols map to themselves") {
  for (LexKind kind : {LexKind::kFirst, LexKind::kLast}) {
    const LexOrder order(kind, 4, 1);
    for (Symbol y = 0; y < 4; ++y) CHECK(order.encode(w({y})) == y);
  }
}

TEST_CASE("encode matches the positional definitions and is a bijection") {
  for (int m = 1; m <= 3; ++m) {
    for (int n = 0; n <= 5; ++n) {
      const LexOrder flo(LexKind::kFirst, m, n);
      const LexOrder llo(LexKind::kLast, m, n);
      const auto strings = all_strings(m, n);
      REQUIRE(flo.size() == static_cast<Index>(strings.size()));
      std::set<Index> seen_f;
      std::set<Index> seen_l;
      for (const auto& s : strings) {
        const Index f = flo.encode(s);
        const Index l = llo.encode(s);
        CHECK(f == flo_index(s, m));
        CHECK(l == llo_index(s, m));
        CHECK(flo.decode(f) == s);
        CHECK(llo.decode(l) == s);
        seen_f.insert(f);
        seen_l.insert(l);
      }
      CHECK(seen_f.size() == strings.size());
      CHECK(seen_l.size() == strings.size());
      if (!strings.empty()) {
        CHECK(*seen_f.rbegin() == flo.size() - 1);
        CHECK(*seen_l.rbegin() == llo.size() - 1);
      }
    }
  }
}

TEST_CASE("prepend and append examples") {
  CHECK(LexOrder(LexKind::kFirst, 2, 1).prepend_index(1, 0) == 1);
  CHECK(LexOrder(LexKind::kLast, 2, 1).prepend_index(1, 0) == 2);
  CHECK(LexOrder(LexKind::kLast, 2, 1).append_index(0, 1) == 1);
  CHECK(LexOrder(LexKind::kFirst, 2, 1).append_index(1, 0) == 1);
}

TEST_CASE("prepend and append agree with encode") {
  for (int m = 2; m <= 3; ++m) {
    for (int n = 1; n <= 4; ++n) {
      for (LexKind kind : {LexKind::kFirst, LexKind::kLast}) {
        const LexOrder shorter(kind, m, n - 1);
        const LexOrder longer(kind, m, n);
        for (const auto& u : all_strings(m, n - 1)) {
          const Index ui = shorter.encode(u);
          for (Symbol y = 0; y < m; ++y) {
            std::vector<Symbol> yu{y};
            yu.insert(yu.end(), u.begin(), u.end());
            std::vector<Symbol> uy = u;
            uy.push_back(y);
            CHECK(shorter.prepend_index(y, ui) == longer.encode(yu));
            CHECK(shorter.append_index(ui, y) == longer.encode(uy));
          }
        }
      }
    }
  }
}

TEST_CASE("range errors") {
  const LexOrder order(LexKind::kFirst, 2, 3);
  CHECK(raises(ErrorKind::kDomain, [&] { order.encode(w({0, 1})); }));
  CHECK(raises(ErrorKind::kDomain, [&] { order.encode(w({0, 1, 2})); }));
  CHECK(raises(ErrorKind::kDomain, [&] { order.decode(8); }));
  CHECK(raises(ErrorKind::kDomain, [&] { order.decode(-1); }));
  CHECK(raises(ErrorKind::kDomain, [&] { order.prepend_index(2, 0); }));
  CHECK(raises(ErrorKind::kDomain, [&] { order.append_index(8, 0); }));
}

TEST_CASE("index overflow is a size-limit error") {
  CHECK(checked_power(2, 62) == (Index{1} << 62));
  CHECK(raises(ErrorKind::kSizeLimit, [] { checked_power(2, 63); }));
  CHECK(raises(ErrorKind::kSizeLimit, [] { LexOrder(LexKind::kLast, 10, 19); }));
  CHECK_NOTHROW(LexOrder(LexKind::kLast, 10, 18));
}
