#include <doctest.h>

#include <random>
#include <vector>

#include "hmmred/error.hpp"
#include "hmmred/experiments.hpp"
#include "hmmred/hankel.hpp"
#include "hmmred/hmm.hpp"
#include "support/oracles.hpp"

using namespace hmmred;
using hmmred::testing::all_strings;
using hmmred::testing::flo_index;
using hmmred::testing::llo_index;
using hmmred::testing::max_abs_diff;
using hmmred::testing::path_sum_probability;
using hmmred::testing::random_hmm;

namespace {

bool raises(ErrorKind kind, const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

std::vector<HmmModel> model_corpus() {
  std::mt19937_64 engine(2024);
  std::vector<HmmModel> models{model_from_ab(benchmark_example(1)),
                               model_from_ab(benchmark_example(2))};
  for (int states = 1; states <= 5; ++states) {
    for (int rep = 0; rep < 3; ++rep) models.push_back(random_hmm(states, 2, engine));
  }
  return models;
}

// H filled by enumerating (u, v) pairs and locating them through the
// definition-level index formulas.
Matrix enumerated_hankel(const HmmModel& model, int n) {
  const int m = model.alphabet_size();
  const auto strings = all_strings(m, n);
  Matrix H(static_cast<Index>(strings.size()), static_cast<Index>(strings.size()));
  for (const auto& u : strings) {
    for (const auto& v : strings) {
      std::vector<Symbol> uv = u;
      uv.insert(uv.end(), v.begin(), v.end());
      H(flo_index(u, m), llo_index(v, m)) = path_sum_probability(model, uv);
    }
  }
  return H;
}

}  // namespace

TEST_CASE("half-length one holds the two-symbol probabilities") {
  const HmmModel model = model_from_ab(benchmark_example(2));
  const HankelSystem sys = build_factors(model, 1);
  for (Symbol a = 0; a < 2; ++a) {
    for (Symbol b = 0; b < 2; ++b) {
      const double p = string_probability(model, std::vector<Symbol>{a, b});
      CHECK(std::abs(sys.H(a, b) - p) <= 1e-15);
    }
  }
}

TEST_CASE("entries match the enumeration oracle") {
  const HmmModel ex1 = model_from_ab(benchmark_example(1));
  CHECK(max_abs_diff(build_factors(ex1, 2).H, enumerated_hankel(ex1, 2)) <= 1e-14);
  for (const HmmModel& model : model_corpus()) {
    for (int n = 1; n <= 3; ++n) {
      CHECK(max_abs_diff(build_factors(model, n).H, enumerated_hankel(model, n)) <= 1e-13);
    }
  }
}

TEST_CASE("factor invariants") {
  for (const HmmModel& model : model_corpus()) {
    for (int n = 1; n <= 4; ++n) {
      const HankelSystem sys = build_factors(model, n);
      const Index ell = Index{1} << n;
      REQUIRE(sys.H.rows() == ell);
      REQUIRE(sys.Pi.rows() == ell);
      REQUIRE(sys.Gamma.cols() == ell);
      Matrix product = sys.Pi * sys.Gamma;
      CHECK(max_abs_diff(sys.H, product) <= 1e-12);
      CHECK(std::abs(sys.H.sum() - 1.0) <= 1e-10);
      for (Index r = 0; r < sys.Gamma.rows(); ++r) {
        CHECK(std::abs(sys.Gamma.row(r).sum() - 1.0) <= 1e-10);
      }
      CHECK(sys.H.minCoeff() >= 0.0);
    }
  }
  CHECK(std::abs(build_factors(model_from_ab(benchmark_example(2)), 3).H.sum() - 1.0) <= 1e-10);
}

TEST_CASE("forward factor equals the vertical stacking of Pi_{n-1} M(y)") {
  for (const HmmModel& model : model_corpus()) {
    for (int n = 1; n <= 4; ++n) {
      const Matrix prev = build_factors(model, n - 1 == 0 ? 1 : n - 1).Pi;
      const Matrix base = n == 1 ? Matrix(model.stationary()) : prev;
      Matrix stacked(base.rows() * 2, model.state_size());
      stacked << base * model.emission_transition(0), base * model.emission_transition(1);
      CHECK(build_factors(model, n).Pi == stacked);

      const Matrix prev_gamma =
          n == 1 ? Matrix(Matrix::Ones(model.state_size(), 1)) : build_factors(model, n - 1).Gamma;
      Matrix side(model.state_size(), prev_gamma.cols() * 2);
      side << model.emission_transition(0) * prev_gamma, model.emission_transition(1) * prev_gamma;
      CHECK(build_factors(model, n).Gamma == side);
    }
  }
}

TEST_CASE("Hankel from a distribution oracle") {
  const Matrix uniform = hankel_from_oracle([](std::span<const Symbol>) { return 1.0 / 16.0; }, 2, 2);
  CHECK(uniform == Matrix::Constant(4, 4, 1.0 / 16.0));

  for (const HmmModel& model : model_corpus()) {
    for (int n = 1; n <= 3; ++n) {
      const Matrix from_oracle = hankel_from_oracle(
          [&](std::span<const Symbol> w) { return string_probability(model, w); }, 2, n);
      CHECK(max_abs_diff(from_oracle, build_factors(model, n).H) <= 1e-13);
    }
  }

  CHECK(raises(ErrorKind::kInput, [] {
    hankel_from_oracle([](std::span<const Symbol> w) { return w[0] == 0 ? -0.1 : 0.1; }, 2, 2);
  }));
  CHECK(raises(ErrorKind::kInput,
               [] { hankel_from_oracle([](std::span<const Symbol>) { return 0.1; }, 2, 2); }));
}

TEST_CASE("size cap") {
  const HmmModel model = model_from_ab(benchmark_example(1));
  CHECK(raises(ErrorKind::kSizeLimit, [&] { build_factors(model, 11); }));
  CHECK(raises(ErrorKind::kSizeLimit, [&] { build_factors(model, 3, 63); }));
  CHECK_NOTHROW(build_factors(model, 3, 64));
  CHECK(raises(ErrorKind::kSizeLimit, [&] { build_factors(model, 40); }));
  CHECK(raises(ErrorKind::kSizeLimit, [&] { block_diag_gamma(Matrix::Ones(4, 512), 2, 4096); }));
}

TEST_CASE("marginalization") {
  for (const HmmModel& model : model_corpus()) {
    for (int n = 2; n <= 4; ++n) {
      const HankelSystem big = build_factors(model, n);
      const HankelSystem small = build_factors(model, n - 1);
      CHECK(max_abs_diff(marginalize_pi(big.Pi, 2), small.Pi) <= 1e-14);
      CHECK(max_abs_diff(marginalize_gamma(big.Gamma, 2), small.Gamma) <= 1e-14);
      CHECK(std::abs(marginalize_pi(big.Pi, 2).sum() - big.Pi.sum()) <= 1e-14);
    }
    const HankelSystem one = build_factors(model, 1);
    const Matrix collapsed = marginalize_gamma(one.Gamma, 2);
    REQUIRE(collapsed.cols() == 1);
    CHECK(max_abs_diff(collapsed, one.Gamma.rowwise().sum()) <= 1e-15);
    CHECK(max_abs_diff(marginalize_pi(one.Pi, 2), model.stationary()) <= 1e-15);
  }

  Matrix equal_rows(9, 2);
  for (Index r = 0; r < 9; ++r) equal_rows.row(r) << 0.25, 0.5;
  const Matrix out = marginalize_pi(equal_rows, 3);
  REQUIRE(out.rows() == 3);
  for (Index r = 0; r < 3; ++r) {
    CHECK(out(r, 0) == 0.75);
    CHECK(out(r, 1) == 1.5);
  }

  Matrix stochastic = Matrix::Constant(3, 8, 0.125);
  const Matrix g = marginalize_gamma(stochastic, 2);
  for (Index r = 0; r < 3; ++r) CHECK(g.row(r).sum() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK(raises(ErrorKind::kShape, [] { marginalize_pi(Matrix::Ones(6, 2), 2); }));
  CHECK(raises(ErrorKind::kShape, [] { marginalize_gamma(Matrix::Ones(2, 5), 2); }));
  CHECK(raises(ErrorKind::kShape, [] { repackage_pi_tilde(Matrix::Ones(10, 2), 3); }));
}

TEST_CASE("block diagonal factor") {
  CHECK(block_diag_gamma(Matrix::Ones(1, 1), 2) == Matrix::Identity(2, 2));

  const Matrix g = Matrix::Constant(2, 3, 0.5);
  const Matrix bd = block_diag_gamma(g, 3);
  REQUIRE(bd.rows() == 6);
  REQUIRE(bd.cols() == 9);
  CHECK(bd.sum() == doctest::Approx(3 * g.sum()));
  for (Index r = 0; r < 6; ++r) {
    for (Index c = 0; c < 9; ++c) CHECK(bd(r, c) == (r / 2 == c / 3 ? 0.5 : 0.0));
  }

  for (const HmmModel& model : model_corpus()) {
    for (int n = 2; n <= 4; ++n) {
      const Matrix lhs = model.concatenated() * block_diag_gamma(build_factors(model, n - 1).Gamma, 2);
      CHECK(max_abs_diff(lhs, build_factors(model, n).Gamma) <= 1e-14);
    }
  }
}

TEST_CASE("repackaged forward factor") {
  for (const HmmModel& model : model_corpus()) {
    for (int n = 2; n <= 4; ++n) {
      const Matrix tilde = repackage_pi_tilde(build_factors(model, n).Pi, 2);
      const Matrix rhs = build_factors(model, n - 1).Pi * model.concatenated();
      CHECK(max_abs_diff(tilde, rhs) <= 1e-14);
      CHECK(std::abs(tilde.sum() - build_factors(model, n).Pi.sum()) <= 1e-14);
    }
    const Matrix row = repackage_pi_tilde(build_factors(model, 1).Pi, 2);
    REQUIRE(row.rows() == 1);
    Matrix expected(1, 2 * model.state_size());
    expected << model.stationary() * model.emission_transition(0),
        model.stationary() * model.emission_transition(1);
    CHECK(max_abs_diff(row, expected) <= 1e-15);
  }
}

TEST_CASE("power exponent") {
  CHECK(power_exponent(1, 2) == 0);
  CHECK(power_exponent(32, 2) == 5);
  CHECK(power_exponent(81, 3) == 4);
  CHECK(raises(ErrorKind::kShape, [] { power_exponent(12, 2); }));
}
