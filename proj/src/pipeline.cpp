#include "hmmred/pipeline.hpp"

#include <string>

#include "hmmred/lexical.hpp"

namespace hmmred {
namespace {

ReductionResult reduce_impl(const Matrix& hankel, int alphabet_size, const ReductionConfig& cfg,
                            const HmmModel* original) {
  ReductionResult result;
  result.warnings = validate(cfg);
  result.seed = cfg.step1.seed;
  result.half_length = cfg.half_length;
  result.eval_half_length = cfg.eval_half_length.value_or(cfg.half_length);
  result.step2_version = cfg.step2_version;

  const nmf::FactorState step1 = nmf::step1_factorize(hankel, cfg.target_size, cfg.step1);
  result.div1b = step1.initial_divergence;
  result.div1 = step1.trace.back();
  result.step1_trace = step1.trace;
  result.step1_iterations = step1.iterations;

  const Step2Inputs inputs =
      prepare_step2(step1, alphabet_size, cfg.step2_version, cfg.max_hankel_entries);
  nmf::ParameterState step2 = run_step2(inputs, cfg.step2);
  result.div2b = step2.initial_divergence;
  result.div2 = step2.trace.back();
  result.step2_trace = std::move(step2.trace);
  result.step2_iterations = step2.iterations;
  result.m_concat = std::move(step2.m_concat);

  const Index n_states = result.m_concat.rows();
  result.transition = Matrix::Zero(n_states, n_states);
  for (int y = 0; y < alphabet_size; ++y) {
    result.transition += result.m_concat.middleCols(y * n_states, n_states);
  }

  try {
    result.model_star.emplace(model_from_concatenated(result.m_concat, alphabet_size));
  } catch (const Error& e) {
    throw ReductionError(e, std::move(result));
  }
  result.stationary = result.model_star->stationary();

  if (result.eval_half_length == cfg.half_length) {
    const HankelSystem reduced =
        build_factors(*result.model_star, cfg.half_length, cfg.max_hankel_entries);
    result.div_final = nmf::divergence(hankel, reduced.H);
  } else if (original != nullptr) {
    result.div_final = final_divergence(*original, *result.model_star, result.eval_half_length,
                                        cfg.max_hankel_entries);
  } else {
    throw Error(ErrorKind::kValidation,
                "an evaluation horizon different from the fitted one needs the original model");
  }
  return result;
}

}  // namespace

std::string_view to_string(Step2Version version) {
  return version == Step2Version::kGamma ? "gamma" : "pi";
}

Step2Version parse_step2_version(std::string_view text) {
  if (text == "gamma") return Step2Version::kGamma;
  if (text == "pi") return Step2Version::kPi;
  throw Error(ErrorKind::kValidation, "unknown Step-2 version '" + std::string(text) + "'");
}

ReductionConfig with_seed(ReductionConfig cfg, std::uint64_t seed) {
  cfg.step1.seed = seed;
  cfg.step2.seed = seed;
  return cfg;
}

std::vector<std::string> validate(const ReductionConfig& cfg) {
  if (cfg.target_size < 1) throw Error(ErrorKind::kValidation, "target size must be at least 1");
  if (cfg.half_length < 2) {
    throw Error(ErrorKind::kValidation, "Hankel half-length must be at least 2");
  }
  if (cfg.eval_half_length && *cfg.eval_half_length < 1) {
    throw Error(ErrorKind::kValidation, "evaluation half-length must be at least 1");
  }
  if (cfg.step1.max_iterations < 1 || cfg.step2.max_iterations < 1) {
    throw Error(ErrorKind::kValidation, "iteration budgets must be at least 1");
  }
  std::vector<std::string> warnings;
  if (cfg.half_length <= 2 * cfg.target_size) {
    warnings.push_back("half-length " + std::to_string(cfg.half_length) +
                       " does not exceed twice the target size " +
                       std::to_string(cfg.target_size) +
                       "; the Hankel matrix may not determine the reduced law");
  }
  return warnings;
}

Step2Inputs prepare_step2(const nmf::FactorState& step1, int alphabet_size, Step2Version version,
                          Index max_entries) {
  Step2Inputs inputs;
  inputs.version = version;
  if (version == Step2Version::kGamma) {
    inputs.target = step1.right;
    inputs.fixed =
        block_diag_gamma(marginalize_gamma(step1.right, alphabet_size), alphabet_size, max_entries);
  } else {
    inputs.target = repackage_pi_tilde(step1.left, alphabet_size);
    inputs.fixed = marginalize_pi(step1.left, alphabet_size);
  }
  return inputs;
}

nmf::ParameterState run_step2(const Step2Inputs& inputs, const nmf::Step2Config& cfg) {
  if (inputs.version == Step2Version::kGamma) {
    return nmf::step2_gamma(inputs.target, inputs.fixed, cfg);
  }
  return nmf::step2_pi(inputs.target, inputs.fixed, cfg);
}

ReductionResult reduce(const HmmModel& model, const ReductionConfig& cfg) {
  validate(cfg);
  const HankelSystem original = build_factors(model, cfg.half_length, cfg.max_hankel_entries);
  return reduce_impl(original.H, model.alphabet_size(), cfg, &model);
}

ReductionResult reduce_hankel(const Matrix& hankel, int alphabet_size,
                              const ReductionConfig& cfg) {
  validate(cfg);
  const Index ell = checked_power(alphabet_size, cfg.half_length);
  if (hankel.rows() != ell || hankel.cols() != ell) {
    throw Error(ErrorKind::kShape, "Hankel matrix does not match m^n x m^n");
  }
  return reduce_impl(hankel, alphabet_size, cfg, nullptr);
}

double final_divergence(const HmmModel& original, const HmmModel& reduced, int half_length,
                        Index max_entries) {
  if (original.alphabet_size() != reduced.alphabet_size()) {
    throw Error(ErrorKind::kValidation, "models have different alphabets (" +
                                            std::to_string(original.alphabet_size()) + " vs " +
                                            std::to_string(reduced.alphabet_size()) + ")");
  }
  const HankelSystem a = build_factors(original, half_length, max_entries);
  const HankelSystem b = build_factors(reduced, half_length, max_entries);
  return nmf::divergence(a.H, b.H);
}

}  // namespace hmmred
