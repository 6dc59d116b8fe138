#include <doctest.h>

#include <random>

#include "hmmred/error.hpp"
#include "hmmred/experiments.hpp"
#include "hmmred/hankel.hpp"
#include "hmmred/nmf.hpp"
#include "hmmred/pipeline.hpp"
#include "support/oracles.hpp"

using namespace hmmred;
using hmmred::testing::max_abs_diff;
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

bool nonincreasing(const std::vector<double>& trace, double start) {
  double prev = start;
  for (double v : trace) {
    if (v > prev * (1.0 + nmf::kMonotoneRelativeSlack) + nmf::kMonotoneAbsoluteSlack) return false;
    prev = v;
  }
  return true;
}

}  // namespace

TEST_CASE("exact factors have zero divergence") {
  const HankelSystem sys = build_factors(model_from_ab(benchmark_example(1)), 2);
  CHECK(nmf::divergence(sys.H, sys.Pi * sys.Gamma) <= 1e-16);
}

TEST_CASE("rank-one Hankel is recovered") {
  RowVector p(4);
  p << 0.1, 0.2, 0.3, 0.4;
  RowVector q(4);
  q << 0.4, 0.3, 0.2, 0.1;
  const Matrix H = p.transpose() * q;
  nmf::Step1Config cfg;
  cfg.max_iterations = 200;
  cfg.seed = 3;
  const nmf::FactorState st = nmf::step1_factorize(H, 1, cfg);
  CHECK(max_abs_diff(st.left, p.transpose()) <= 1e-8);
  CHECK(max_abs_diff(st.right, q) <= 1e-8);
}

TEST_CASE("step 1 at the true size fits the Hankel matrix") {
  const HmmModel model = model_from_ab(benchmark_example(1));
  const HankelSystem sys = build_factors(model, 3);
  std::mt19937_64 engine(17);
  std::uniform_real_distribution<double> noise(0.99, 1.01);
  nmf::Step1Config cfg;
  cfg.max_iterations = 3000;
  cfg.initial_left = sys.Pi;
  cfg.initial_right = sys.Gamma;
  for (Index i = 0; i < cfg.initial_left->size(); ++i) cfg.initial_left->data()[i] *= noise(engine);
  for (Index i = 0; i < cfg.initial_right->size(); ++i) cfg.initial_right->data()[i] *= noise(engine);
  const nmf::FactorState st = nmf::step1_factorize(sys.H, 4, cfg);
  CHECK(st.trace.back() <= 1e-10);
  CHECK(st.trace.back() < st.initial_divergence * 1e-4);
}

TEST_CASE("step 1 invariants and monotone trace") {
  std::mt19937_64 engine(41);
  for (int rep = 0; rep < 6; ++rep) {
    const HmmModel model = random_hmm(3 + rep % 2, 2, engine);
    const HankelSystem sys = build_factors(model, 3);
    nmf::Step1Config cfg;
    cfg.max_iterations = 400;
    cfg.seed = static_cast<std::uint64_t>(rep);
    cfg.init_lower = rep % 2 == 0 ? 0.0 : 0.5;
    const nmf::FactorState st = nmf::step1_factorize(sys.H, 2, cfg);
    CHECK(st.iterations == 400);
    CHECK(st.trace.size() == 400u);
    CHECK(nonincreasing(st.trace, st.initial_divergence));
    CHECK(std::abs(st.left.sum() - 1.0) <= 1e-6);
    for (Index a = 0; a < 2; ++a) CHECK(std::abs(st.right.row(a).sum() - 1.0) <= 1e-14);
    CHECK(st.left.minCoeff() > 0.0);
    CHECK(st.right.minCoeff() > 0.0);
  }
}

TEST_CASE("step 1 is deterministic and backend independent") {
  const HankelSystem sys = build_factors(model_from_ab(benchmark_example(2)), 5);
  nmf::Step1Config cfg;
  cfg.max_iterations = 50;
  cfg.seed = 9;
  const nmf::FactorState a = nmf::step1_factorize(sys.H, 2, cfg);
  cfg.backend = kernels::Backend::kSerial;
  const nmf::FactorState b = nmf::step1_factorize(sys.H, 2, cfg);
  CHECK(a.left == b.left);
  CHECK(a.right == b.right);
  CHECK(a.trace == b.trace);
  cfg.seed = 10;
  CHECK(nmf::step1_factorize(sys.H, 2, cfg).left != a.left);
}

TEST_CASE("step 1 early stop") {
  const HankelSystem sys = build_factors(model_from_ab(benchmark_example(1)), 3);
  nmf::Step1Config cfg;
  cfg.max_iterations = 3000;
  cfg.tolerance = 1e-3;
  const nmf::FactorState st = nmf::step1_factorize(sys.H, 2, cfg);
  CHECK(st.iterations < 3000);
  CHECK(st.trace.size() == static_cast<std::size_t>(st.iterations));
}

TEST_CASE("step 1 input errors") {
  const HankelSystem sys = build_factors(model_from_ab(benchmark_example(1)), 2);
  nmf::Step1Config cfg;
  CHECK(raises(ErrorKind::kInput, [&] { nmf::step1_factorize(sys.H * 2.0, 2, cfg); }));
  Matrix negative = sys.H;
  negative(0, 0) = -negative(0, 0);
  CHECK(raises(ErrorKind::kInput, [&] { nmf::step1_factorize(negative, 2, cfg); }));
  CHECK(raises(ErrorKind::kValidation, [&] { nmf::step1_factorize(sys.H, 0, cfg); }));
  cfg.max_iterations = 0;
  CHECK(raises(ErrorKind::kValidation, [&] { nmf::step1_factorize(sys.H, 2, cfg); }));
  cfg.max_iterations = 5;
  cfg.initial_left = Matrix::Ones(4, 2);
  CHECK(raises(ErrorKind::kValidation, [&] { nmf::step1_factorize(sys.H, 2, cfg); }));
  cfg.initial_right = Matrix::Ones(2, 3);
  CHECK(raises(ErrorKind::kShape, [&] { nmf::step1_factorize(sys.H, 2, cfg); }));
}

TEST_CASE("initial factors are constraint-normalized") {
  nmf::Step1Config cfg;
  cfg.seed = 4;
  const auto [left, right] = nmf::initial_factors(16, 3, cfg);
  CHECK(std::abs(left.sum() - 1.0) <= 1e-15);
  for (Index a = 0; a < 3; ++a) CHECK(std::abs(right.row(a).sum() - 1.0) <= 1e-15);
  nmf::Step2Config cfg2;
  const Matrix M = nmf::initial_parameters(2, 4, cfg2);
  for (Index r = 0; r < 2; ++r) CHECK(std::abs(M.row(r).sum() - 1.0) <= 1e-15);
  CHECK(M.minCoeff() > 0.0);
  CHECK(raises(ErrorKind::kValidation, [] {
    auto e = nmf::make_engine(0);
    nmf::random_positive(2, 2, e, 1.0);
  }));
}

TEST_CASE("step 2 recovers the parameters from exact factors") {
  std::mt19937_64 engine(123);
  for (int rep = 0; rep < 4; ++rep) {
    const HmmModel model = random_hmm(2, 2, engine);
    const HankelSystem big = build_factors(model, 4);
    const HankelSystem small = build_factors(model, 3);
    nmf::Step2Config cfg;
    cfg.max_iterations = 3000;
    cfg.seed = static_cast<std::uint64_t>(rep);

    const nmf::ParameterState pi_run =
        nmf::step2_pi(repackage_pi_tilde(big.Pi, 2), small.Pi, cfg);
    CHECK(pi_run.trace.back() <= 1e-12);
    CHECK(max_abs_diff(pi_run.m_concat, model.concatenated()) <= 1e-4);

    cfg.max_iterations = 20000;  // the Gamma version converges more slowly here
    const nmf::ParameterState g_run =
        nmf::step2_gamma(big.Gamma, block_diag_gamma(small.Gamma, 2), cfg);
    CHECK(g_run.trace.back() <= 1e-10);
    CHECK(max_abs_diff(g_run.m_concat, model.concatenated()) <= 1e-4);
  }
}

TEST_CASE("step 2 identity-feasible case") {
  Matrix gamma(3, 4);
  gamma << 0.7, 0.1, 0.1, 0.1, 0.1, 0.6, 0.2, 0.1, 0.2, 0.2, 0.1, 0.5;
  nmf::Step2Config cfg;
  cfg.max_iterations = 3000;
  cfg.initial = Matrix::Identity(3, 3) + Matrix::Constant(3, 3, 0.05);
  const nmf::ParameterState st = nmf::step2_gamma(gamma, gamma, cfg);
  CHECK(max_abs_diff(st.m_concat, Matrix::Identity(3, 3)) <= 1e-3);
  CHECK(st.trace.back() <= 1e-6);
}

TEST_CASE("step 2 gamma keeps rows stochastic without renormalization") {
  std::mt19937_64 engine(8);
  for (int rep = 0; rep < 5; ++rep) {
    const HankelSystem sys = build_factors(random_hmm(4, 2, engine), 4);
    nmf::Step1Config c1;
    c1.max_iterations = 100;
    c1.seed = static_cast<std::uint64_t>(rep);
    const nmf::FactorState s1 = nmf::step1_factorize(sys.H, 2, c1);
    const Step2Inputs in = prepare_step2(s1, 2, Step2Version::kGamma);
    nmf::Step2Config c2;
    c2.max_iterations = 500;
    c2.seed = static_cast<std::uint64_t>(rep);
    const nmf::ParameterState st = nmf::step2_gamma(in.target, in.fixed, c2);
    CHECK(st.max_constraint_drift <= 1e-10);
    CHECK(nonincreasing(st.trace, st.initial_divergence));

    const Step2Inputs pin = prepare_step2(s1, 2, Step2Version::kPi);
    const nmf::ParameterState pst = nmf::step2_pi(pin.target, pin.fixed, c2);
    CHECK(nonincreasing(pst.trace, pst.initial_divergence));
    CHECK(pst.max_constraint_drift <= 1e-14);
  }
}

TEST_CASE("step 2 is insensitive to its initialization") {
  const HankelSystem sys = build_factors(model_from_ab(benchmark_example(1)), 5);
  nmf::Step1Config c1;
  const nmf::FactorState s1 = nmf::step1_factorize(sys.H, 2, c1);
  const Step2Inputs in = prepare_step2(s1, 2, Step2Version::kGamma);
  std::vector<Matrix> finals;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    nmf::Step2Config c2;
    c2.seed = seed;
    finals.push_back(nmf::step2_gamma(in.target, in.fixed, c2).m_concat);
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < finals.size(); ++a) {
    for (std::size_t b = a + 1; b < finals.size(); ++b) {
      worst = std::max(worst, max_abs_diff(finals[a], finals[b]));
    }
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("step 2 checkpoints and early stop") {
  const HankelSystem sys = build_factors(model_from_ab(benchmark_example(1)), 3);
  nmf::Step1Config c1;
  c1.max_iterations = 100;
  const nmf::FactorState s1 = nmf::step1_factorize(sys.H, 2, c1);
  const Step2Inputs in = prepare_step2(s1, 2, Step2Version::kGamma);
  nmf::Step2Config c2;
  c2.max_iterations = 20;
  c2.checkpoints = {0, 1, 5, 20, 50};
  const nmf::ParameterState st = nmf::step2_gamma(in.target, in.fixed, c2);
  REQUIRE(st.snapshots.size() == 4u);
  CHECK(st.snapshots[0].first == 0);
  CHECK(st.snapshots[0].second == nmf::initial_parameters(2, 4, c2));
  CHECK(st.snapshots[3].first == 20);
  CHECK(st.snapshots[3].second == st.m_concat);

  c2.max_iterations = 3000;
  c2.tolerance = 1e-2;
  const nmf::ParameterState early = nmf::step2_gamma(in.target, in.fixed, c2);
  CHECK(early.iterations < 3000);
}

TEST_CASE("step 2 input errors") {
  const Matrix gamma = Matrix::Constant(2, 4, 0.25);
  nmf::Step2Config cfg;
  CHECK(raises(ErrorKind::kInput, [&] { nmf::step2_gamma(gamma * 1.1, gamma, cfg); }));
  CHECK(raises(ErrorKind::kShape, [&] { nmf::step2_gamma(gamma, Matrix::Constant(3, 4, 0.25), cfg); }));

  Matrix pi_prev = Matrix::Constant(4, 2, 0.1);
  pi_prev.col(1).setZero();
  CHECK(raises(ErrorKind::kDegenerateState,
               [&] { nmf::step2_pi(Matrix::Constant(4, 4, 0.05), pi_prev, cfg); }));
  CHECK(raises(ErrorKind::kShape,
               [&] { nmf::step2_pi(Matrix::Constant(4, 3, 0.05), Matrix::Constant(4, 2, 0.1), cfg); }));
  cfg.initial = Matrix::Ones(3, 4);
  CHECK(raises(ErrorKind::kShape, [&] { nmf::step2_gamma(gamma, gamma, cfg); }));
}
