#ifndef HMMRED_EXPERIMENTS_HPP
#define HMMRED_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hmmred/hmm.hpp"
#include "hmmred/pipeline.hpp"

namespace hmmred {

// Sum over entries of the unbiased sample variance across T >= 2 matrices.
double variability_index(std::span<const Matrix> matrices);

// Applies the state relabeling `perm` (new state i is old state perm[i]) to
// every block of an N x mN parameter matrix.
Matrix permute_states(const Matrix& m_concat, std::span<const int> perm);

// Relabels the states of `m_concat` to minimize the max-entry distance to
// `reference` (exhaustive over N! permutations, N <= 8).
Matrix align_states(const Matrix& m_concat, const Matrix& reference);

struct RunRecord {
  int run = 0;  // 1-based, as printed in the tables
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double div1b = 0.0;
  double div1 = 0.0;
  double div2b = 0.0;
  double div2 = 0.0;
  double div_final = 0.0;
  Matrix m_concat;
};

struct ExperimentReport {
  std::vector<RunRecord> rows;
  // Over the successful runs' M*, each relabeled to the best run's states.
  // Absent with fewer than two successful runs.
  std::optional<double> variability;
  std::vector<double> mean_step1_trace;
  std::vector<double> mean_step2_trace;
  std::optional<int> best_run;  // index into rows of the smallest div_final
};

struct BatchOptions {
  // Distribute runs over OpenMP threads; each run's kernels then go serial.
  bool parallel_runs = true;
};

// T independent reductions with seeds base_seed + t. A failing run is
// recorded and the batch continues.
ExperimentReport run_batch(const HmmModel& model, const ReductionConfig& cfg, int runs,
                           std::uint64_t base_seed, const BatchOptions& options = {});

struct VersionSummary {
  Step2Version version = Step2Version::kGamma;
  std::vector<Matrix> finals;
  std::vector<double> div2b;
  std::vector<double> div2;
  double variability = 0.0;                            // R over finals (T >= 2)
  std::vector<std::pair<int, double>> variability_curve;  // R at each checkpoint
  std::vector<double> mean_trace;  // index 0 = initial divergence
  Matrix mean_m;
};

struct Step2Comparison {
  nmf::FactorState step1;
  VersionSummary gamma;
  VersionSummary pi;
  double mean_difference = 0.0;  // max |mean M*_Gamma - mean M*_Pi|
};

// One Step-1 factorization (seed base_seed), then both Step-2 versions from
// the same random M0 seeds base_seed + t. cfg.step2.checkpoints selects the
// iterations of the variability curve.
Step2Comparison compare_step2_versions(const HmmModel& model, const ReductionConfig& cfg, int runs,
                                       std::uint64_t base_seed,
                                       const BatchOptions& options = {});

// Iterations 0, 1, 2, 5, 10, 20, 50, ... up to and including `budget`, plus
// 300, 3000 and 20000 when within budget.
std::vector<int> default_checkpoints(int budget);

// The two four-state binary-output processes used as reduction benchmarks.
AbSpec benchmark_example(int which);

struct ReproducePreset {
  int example = 1;
  int original_size = 4;
  int target_size = 2;
  int half_length = 5;
  int step1_iterations = 3000;
  int step2_iterations = 3000;
  int runs = 30;
  std::string label;  // e.g. "example1_4to2"
};

// Budgets per reduction: 3000 Step-1 iterations, 3000 (4to2) or 20000 (4to3)
// Step-2 iterations, half-length 2N + 1.
ReproducePreset reproduce_preset(int example, std::string_view reduction);

}  // namespace hmmred

#endif  // HMMRED_EXPERIMENTS_HPP
