#ifndef HMMRED_PIPELINE_HPP
#define HMMRED_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmmred/error.hpp"
#include "hmmred/hankel.hpp"
#include "hmmred/hmm.hpp"
#include "hmmred/nmf.hpp"

namespace hmmred {

enum class Step2Version { kGamma, kPi };

std::string_view to_string(Step2Version version);
Step2Version parse_step2_version(std::string_view text);

struct ReductionConfig {
  int target_size = 2;
  int half_length = 5;
  Step2Version step2_version = Step2Version::kGamma;
  nmf::Step1Config step1;
  nmf::Step2Config step2;
  // Horizon of the final divergence; the fitted half-length when unset.
  std::optional<int> eval_half_length;
  Index max_hankel_entries = kDefaultMaxHankelEntries;
};

// Sets the Step-1 and Step-2 seeds of a run together.
ReductionConfig with_seed(ReductionConfig cfg, std::uint64_t seed);

// Throws kValidation for unusable settings; returns warnings for usable but
// questionable ones (half-length not above twice the target size).
std::vector<std::string> validate(const ReductionConfig& cfg);

struct ReductionResult {
  std::optional<HmmModel> model_star;  // empty only on a failed assembly
  Matrix m_concat;                     // [M*(0), ..., M*(m-1)]
  Matrix transition;                   // A* = sum_y M*(y)
  RowVector stationary;                // pi*
  double div1b = 0.0;
  double div1 = 0.0;
  double div2b = 0.0;
  double div2 = 0.0;
  double div_final = 0.0;
  std::vector<double> step1_trace;
  std::vector<double> step2_trace;
  int step1_iterations = 0;
  int step2_iterations = 0;
  std::uint64_t seed = 0;
  int half_length = 0;
  int eval_half_length = 0;
  Step2Version step2_version = Step2Version::kGamma;
  std::vector<std::string> warnings;
};

// Raised when the learned transition matrix has no unique stationary vector;
// carries everything computed up to that point.
class ReductionError : public Error {
 public:
  ReductionError(const Error& cause, ReductionResult partial)
      : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}
  const ReductionResult& partial() const { return partial_; }

 private:
  ReductionResult partial_;
};

// Inputs of the single-factor parametrization step, derived from a Step-1
// factor pair.
struct Step2Inputs {
  Step2Version version = Step2Version::kGamma;
  Matrix target;  // Gamma* (Gamma version) or Pi tilde* (Pi version)
  Matrix fixed;   // diag(Gamma*_{n-1}, ...) or Pi*_{n-1}
};

Step2Inputs prepare_step2(const nmf::FactorState& step1, int alphabet_size, Step2Version version,
                          Index max_entries = kDefaultMaxHankelEntries);

nmf::ParameterState run_step2(const Step2Inputs& inputs, const nmf::Step2Config& cfg);

// Full two-step reduction of `model` to cfg.target_size states.
ReductionResult reduce(const HmmModel& model, const ReductionConfig& cfg);

// Same, from a precomputed Hankel matrix of the original process.
ReductionResult reduce_hankel(const Matrix& hankel, int alphabet_size,
                              const ReductionConfig& cfg);

// D(H_original || H_reduced) over Hankel matrices of half-length n, i.e. the
// divergence between the two length-2n string distributions.
double final_divergence(const HmmModel& original, const HmmModel& reduced, int half_length,
                        Index max_entries = kDefaultMaxHankelEntries);

}  // namespace hmmred

#endif  // HMMRED_PIPELINE_HPP
