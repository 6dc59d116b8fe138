#include "hmmred/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hmmred/error.hpp"

namespace hmmred {
namespace {

// Average of the traces, index by index, over those long enough to have it.
std::vector<double> mean_trace(const std::vector<const std::vector<double>*>& traces) {
  std::size_t length = 0;
  for (const auto* t : traces) length = std::max(length, t->size());
  std::vector<double> mean(length, 0.0);
  std::vector<int> counts(length, 0);
  for (const auto* t : traces) {
    for (std::size_t i = 0; i < t->size(); ++i) {
      mean[i] += (*t)[i];
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < length; ++i) mean[i] /= counts[i];
  return mean;
}

Matrix mean_matrix(std::span<const Matrix> matrices) {
  Matrix mean = Matrix::Zero(matrices.front().rows(), matrices.front().cols());
  for (const auto& m : matrices) mean += m;
  return mean / static_cast<double>(matrices.size());
}

VersionSummary run_version(const Step2Inputs& inputs, const ReductionConfig& cfg, int runs,
                           std::uint64_t base_seed, const BatchOptions& options) {
  std::vector<nmf::ParameterState> states(runs);
  nmf::Step2Config step2 = cfg.step2;
  if (options.parallel_runs) step2.backend = kernels::Backend::kSerial;
  std::vector<std::string> errors(runs);

#pragma omp parallel for schedule(dynamic) if (options.parallel_runs)
  for (int t = 0; t < runs; ++t) {
    nmf::Step2Config local = step2;
    local.seed = base_seed + static_cast<std::uint64_t>(t);
    try {
      states[t] = run_step2(inputs, local);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (int t = 0; t < runs; ++t) {
    if (!errors[t].empty()) {
      throw Error(ErrorKind::kConsistency,
                  "Step-2 run " + std::to_string(t + 1) + " failed: " + errors[t]);
    }
  }

  VersionSummary summary;
  summary.version = inputs.version;
  std::vector<std::vector<double>> traces(runs);
  for (int t = 0; t < runs; ++t) {
    summary.finals.push_back(states[t].m_concat);
    summary.div2b.push_back(states[t].initial_divergence);
    summary.div2.push_back(states[t].trace.back());
    traces[t].push_back(states[t].initial_divergence);
    traces[t].insert(traces[t].end(), states[t].trace.begin(), states[t].trace.end());
  }
  std::vector<const std::vector<double>*> views;
  for (const auto& t : traces) views.push_back(&t);
  summary.mean_trace = mean_trace(views);
  summary.mean_m = mean_matrix(summary.finals);
  if (runs >= 2) {
    summary.variability = variability_index(summary.finals);
    const auto& reference = states.front().snapshots;
    for (std::size_t c = 0; c < reference.size(); ++c) {
      std::vector<Matrix> at_checkpoint;
      for (const auto& s : states) {
        if (c < s.snapshots.size()) at_checkpoint.push_back(s.snapshots[c].second);
      }
      if (at_checkpoint.size() == static_cast<std::size_t>(runs)) {
        summary.variability_curve.emplace_back(reference[c].first,
                                               variability_index(at_checkpoint));
      }
    }
  }
  return summary;
}

}  // namespace

double variability_index(std::span<const Matrix> matrices) {
  if (matrices.size() < 2) {
    throw Error(ErrorKind::kValidation, "variability index needs at least two matrices");
  }
  const Index rows = matrices.front().rows();
  const Index cols = matrices.front().cols();
  for (const auto& m : matrices) {
    if (m.rows() != rows || m.cols() != cols) {
      throw Error(ErrorKind::kShape, "variability index over matrices of different shapes");
    }
  }
  const Matrix mean = mean_matrix(matrices);
  double total = 0.0;
  for (const auto& m : matrices) total += (m - mean).squaredNorm();
  return total / static_cast<double>(matrices.size() - 1);
}

Matrix permute_states(const Matrix& m_concat, std::span<const int> perm) {
  const Index n = m_concat.rows();
  if (static_cast<Index>(perm.size()) != n || n == 0 || m_concat.cols() % n != 0) {
    throw Error(ErrorKind::kShape, "permutation does not match the parameter matrix");
  }
  const Index blocks = m_concat.cols() / n;
  Matrix out(n, m_concat.cols());
  for (Index b = 0; b < blocks; ++b) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) out(i, b * n + j) = m_concat(perm[i], b * n + perm[j]);
    }
  }
  return out;
}

Matrix align_states(const Matrix& m_concat, const Matrix& reference) {
  const Index n = m_concat.rows();
  if (reference.rows() != n || reference.cols() != m_concat.cols()) {
    throw Error(ErrorKind::kShape, "cannot align parameter matrices of different shapes");
  }
  if (n > 8) throw Error(ErrorKind::kSizeLimit, "state alignment is limited to 8 states");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Matrix best = m_concat;
  double best_distance = std::numeric_limits<double>::infinity();
  do {
    Matrix candidate = permute_states(m_concat, perm);
    const double distance = (candidate - reference).cwiseAbs().maxCoeff();
    if (distance < best_distance) {
      best_distance = distance;
      best = std::move(candidate);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ExperimentReport run_batch(const HmmModel& model, const ReductionConfig& cfg, int runs,
                           std::uint64_t base_seed, const BatchOptions& options) {
  if (runs < 1) throw Error(ErrorKind::kValidation, "a batch needs at least one run");
  validate(cfg);

  ReductionConfig base = cfg;
  if (options.parallel_runs) {
    base.step1.backend = kernels::Backend::kSerial;
    base.step2.backend = kernels::Backend::kSerial;
  }

  ExperimentReport report;
  report.rows.resize(runs);
  std::vector<std::vector<double>> step1_traces(runs);
  std::vector<std::vector<double>> step2_traces(runs);

#pragma omp parallel for schedule(dynamic) if (options.parallel_runs)
  for (int t = 0; t < runs; ++t) {
    RunRecord& row = report.rows[t];
    row.run = t + 1;
    row.seed = base_seed + static_cast<std::uint64_t>(t);
    try {
      ReductionResult result = reduce(model, with_seed(base, row.seed));
      row.ok = true;
      row.div1b = result.div1b;
      row.div1 = result.div1;
      row.div2b = result.div2b;
      row.div2 = result.div2;
      row.div_final = result.div_final;
      row.m_concat = std::move(result.m_concat);
      step1_traces[t] = std::move(result.step1_trace);
      step2_traces[t] = std::move(result.step2_trace);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  }

  // Deterministic fold in run order.
  std::vector<const std::vector<double>*> s1;
  std::vector<const std::vector<double>*> s2;
  for (int t = 0; t < runs; ++t) {
    const RunRecord& row = report.rows[t];
    if (!row.ok) continue;
    s1.push_back(&step1_traces[t]);
    s2.push_back(&step2_traces[t]);
    if (!report.best_run || row.div_final < report.rows[*report.best_run].div_final) {
      report.best_run = t;
    }
  }
  report.mean_step1_trace = mean_trace(s1);
  report.mean_step2_trace = mean_trace(s2);

  if (s1.size() >= 2) {
    const Matrix& reference = report.rows[*report.best_run].m_concat;
    std::vector<Matrix> aligned;
    for (const auto& row : report.rows) {
      if (row.ok) aligned.push_back(align_states(row.m_concat, reference));
    }
    report.variability = variability_index(aligned);
  }
  return report;
}

Step2Comparison compare_step2_versions(const HmmModel& model, const ReductionConfig& cfg, int runs,
                                       std::uint64_t base_seed, const BatchOptions& options) {
  if (runs < 1) throw Error(ErrorKind::kValidation, "a comparison needs at least one run");
  validate(cfg);
  const HankelSystem original = build_factors(model, cfg.half_length, cfg.max_hankel_entries);
  nmf::Step1Config step1 = cfg.step1;
  step1.seed = base_seed;

  Step2Comparison comparison;
  comparison.step1 = nmf::step1_factorize(original.H, cfg.target_size, step1);
  const int m = model.alphabet_size();
  comparison.gamma =
      run_version(prepare_step2(comparison.step1, m, Step2Version::kGamma, cfg.max_hankel_entries),
                  cfg, runs, base_seed, options);
  comparison.pi =
      run_version(prepare_step2(comparison.step1, m, Step2Version::kPi, cfg.max_hankel_entries),
                  cfg, runs, base_seed, options);
  comparison.mean_difference =
      (comparison.gamma.mean_m - comparison.pi.mean_m).cwiseAbs().maxCoeff();
  return comparison;
}

std::vector<int> default_checkpoints(int budget) {
  std::vector<int> points{0};
  for (long decade = 1; decade <= budget; decade *= 10) {
    for (long mult : {1, 2, 5}) {
      if (decade * mult <= budget) points.push_back(static_cast<int>(decade * mult));
    }
  }
  for (int extra : {300, 3000, 20000, budget}) {
    if (extra <= budget) points.push_back(extra);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

AbSpec benchmark_example(int which) {
  Matrix B(4, 2);
  B << 0.3, 0.7,
       0.4, 0.6,
       0.9, 0.1,
       0.7, 0.3;
  Matrix A(4, 4);
  if (which == 1) {
    A << 0.3,  0.15, 0.1,  0.45,
         0.1,  0.5,  0.2,  0.2,
         0.25, 0.15, 0.35, 0.25,
         0.2,  0.35, 0.4,  0.05;
  } else if (which == 2) {
    const double third = 1.0 / 3.0;
    A << 0.125, 0.3,   0.025, 0.55,
         0.4,   0.4,   0.025, 0.175,
         third, third, 0.0,   third,
         0.2,   0.5,   0.025, 0.275;
  } else {
    throw Error(ErrorKind::kValidation, "unknown example " + std::to_string(which));
  }
  return AbSpec{std::move(A), std::move(B)};
}

ReproducePreset reproduce_preset(int example, std::string_view reduction) {
  if (example != 1 && example != 2) {
    throw Error(ErrorKind::kValidation, "example must be 1 or 2");
  }
  ReproducePreset preset;
  preset.example = example;
  if (reduction == "4to2") {
    preset.target_size = 2;
    preset.step2_iterations = 3000;
  } else if (reduction == "4to3") {
    preset.target_size = 3;
    preset.step2_iterations = 20000;
  } else {
    throw Error(ErrorKind::kValidation,
                "reduction must be 4to2 or 4to3, got '" + std::string(reduction) + "'");
  }
  preset.half_length = 2 * preset.target_size + 1;
  preset.label = "example" + std::to_string(example) + "_" + std::string(reduction);
  return preset;
}

}  // namespace hmmred
