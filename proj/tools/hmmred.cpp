// hmmred: approximate an HMM by one with fewer states.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hmmred/error.hpp"
#include "hmmred/experiments.hpp"
#include "hmmred/hankel.hpp"
#include "hmmred/io.hpp"
#include "hmmred/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hmmred;

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kFileNotFound = 2,
  kParseError = 3,
  kValidationError = 4,
  kSizeLimitError = 5,
  kNumericalError = 6,
};

constexpr const char* kExitCodeTable =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error (unknown command or flag)\n"
    "  2  file not found / not writable (error category: io)\n"
    "  3  model file parse error (parse)\n"
    "  4  validation error (validation, domain, shape, input)\n"
    "  5  size limit exceeded (size-limit)\n"
    "  6  numerical failure (reducibility, consistency, degenerate-state)\n"
    "Errors are reported on stderr as one line: error: <category>: <message>";

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return kFileNotFound;
    case ErrorKind::kParse: return kParseError;
    case ErrorKind::kValidation:
    case ErrorKind::kDomain:
    case ErrorKind::kShape:
    case ErrorKind::kInput: return kValidationError;
    case ErrorKind::kSizeLimit: return kSizeLimitError;
    case ErrorKind::kReducibility:
    case ErrorKind::kConsistency:
    case ErrorKind::kDegenerateState: return kNumericalError;
  }
  return kNumericalError;
}

struct ReductionFlags {
  std::string model;
  int size = 2;
  int half_length = 5;
  int eval_half_length = 0;
  std::string step2 = "gamma";
  int iters1 = 3000;
  int iters2 = 3000;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct BatchFlags {
  int runs = 30;
  std::uint64_t base_seed = 0;
  int threads = 0;
  std::string label;
};

void add_reduction_flags(CLI::App* cmd, ReductionFlags& f, bool with_seed) {
  cmd->add_option("model", f.model, "HMM model file")->required();
  cmd->add_option("--size", f.size, "Target state-space size N")->check(CLI::PositiveNumber);
  cmd->add_option("--n", f.half_length, "Hankel half-length n (>= 2)")->check(CLI::Range(2, 64));
  cmd->add_option("--eval-n", f.eval_half_length,
                  "Half-length of the final divergence (0 = same as --n)")
      ->check(CLI::Range(0, 64));
  cmd->add_option("--step2", f.step2, "Step-2 version")->check(CLI::IsMember({"gamma", "pi"}));
  cmd->add_option("--iters1", f.iters1, "Step-1 iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--iters2", f.iters2, "Step-2 iterations")->check(CLI::PositiveNumber);
  if (with_seed) cmd->add_option("--seed", f.seed, "Random seed of the initial factors");
  cmd->add_option("--out", f.out, "Output directory");
}

void add_batch_flags(CLI::App* cmd, BatchFlags& b) {
  cmd->add_option("--runs", b.runs, "Number of runs T")->check(CLI::PositiveNumber);
  cmd->add_option("--base-seed", b.base_seed, "Run t uses seed base-seed + t");
  cmd->add_option("--threads", b.threads, "OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
}

ReductionConfig make_config(const ReductionFlags& f) {
  ReductionConfig cfg;
  cfg.target_size = f.size;
  cfg.half_length = f.half_length;
  if (f.eval_half_length > 0) cfg.eval_half_length = f.eval_half_length;
  cfg.step2_version = parse_step2_version(f.step2);
  cfg.step1.max_iterations = f.iters1;
  cfg.step2.max_iterations = f.iters2;
  return with_seed(cfg, f.seed);
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory '" + out + "'");
  return dir;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void write_batch_outputs(const fs::path& dir, const std::string& label,
                         const ExperimentReport& report) {
  io::write_file(dir / ("table_" + label + ".csv"), io::table_csv(report));
  io::write_file(dir / "fig_final_divergence.csv", io::final_divergence_csv(report));
  io::write_file(dir / "batch_report.json", io::to_json(report).dump(2) + "\n");
  int failed = 0;
  for (const auto& row : report.rows) failed += row.ok ? 0 : 1;
  std::cout << "runs: " << report.rows.size() << " failed: " << failed;
  if (report.best_run) {
    std::cout << " best: " << *report.best_run + 1
              << " div: " << io::format_real(report.rows[*report.best_run].div_final);
  }
  if (report.variability) std::cout << " R: " << io::format_real(*report.variability);
  std::cout << "\n";
}

void write_compare_outputs(const fs::path& dir, const Step2Comparison& comparison) {
  io::write_file(dir / "fig_variability.csv", io::variability_csv(comparison));
  io::write_file(dir / "fig_divergence_decay.csv", io::divergence_decay_csv(comparison));
  io::write_file(dir / "compare_report.json", io::to_json(comparison).dump(2) + "\n");
  std::cout << "R_gamma: " << io::format_real(comparison.gamma.variability)
            << " R_pi: " << io::format_real(comparison.pi.variability)
            << " mean_difference: " << io::format_real(comparison.mean_difference) << "\n";
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate a stationary HMM by an HMM with fewer states via two-step "
               "I-divergence NMF of its Hankel matrix."};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.footer(kExitCodeTable);

  ReductionFlags reduce_flags;
  auto* reduce_cmd = app.add_subcommand("reduce", "Reduce one model (writes report.json, reduced.hmm)");
  add_reduction_flags(reduce_cmd, reduce_flags, true);

  ReductionFlags batch_flags;
  BatchFlags batch_extra;
  auto* batch_cmd = app.add_subcommand(
      "batch", "Independent reductions from random inits (writes table_<label>.csv, "
               "fig_final_divergence.csv, batch_report.json)");
  add_reduction_flags(batch_cmd, batch_flags, false);
  add_batch_flags(batch_cmd, batch_extra);
  batch_cmd->add_option("--label", batch_extra.label,
                        "Table name suffix (default <model stem>_<N0>to<N>)");

  ReductionFlags compare_flags;
  BatchFlags compare_extra;
  auto* compare_cmd = app.add_subcommand(
      "compare-step2", "Gamma vs Pi parametrization from one Step-1 output (writes "
                       "fig_variability.csv, fig_divergence_decay.csv, compare_report.json)");
  add_reduction_flags(compare_cmd, compare_flags, false);
  add_batch_flags(compare_cmd, compare_extra);

  std::string hankel_model;
  int hankel_n = 2;
  std::string hankel_out = "-";
  bool hankel_factors = false;
  auto* hankel_cmd = app.add_subcommand("hankel", "Write the Hankel matrix H as CSV");
  hankel_cmd->add_option("model", hankel_model, "HMM model file")->required();
  hankel_cmd->add_option("--n", hankel_n, "Hankel half-length")->check(CLI::Range(1, 64));
  hankel_cmd->add_option("--out", hankel_out, "Output CSV file ('-' = stdout)");
  hankel_cmd->add_flag("--factors", hankel_factors,
                       "Also write Pi and Gamma next to --out (<stem>_pi.csv, <stem>_gamma.csv)");

  std::string eval_a;
  std::string eval_b;
  int eval_n = 3;
  auto* eval_cmd = app.add_subcommand("eval", "Divergence between the Hankel matrices of two models");
  eval_cmd->add_option("original", eval_a, "Reference model file")->required();
  eval_cmd->add_option("approx", eval_b, "Approximating model file")->required();
  eval_cmd->add_option("--n", eval_n, "Hankel half-length")->check(CLI::Range(1, 64));

  int repro_example = 1;
  std::string repro_reduction = "4to2";
  BatchFlags repro_extra;
  std::string repro_out;
  int repro_n = 0;
  auto* repro_cmd = app.add_subcommand(
      "reproduce", "Benchmark reductions with fixed budgets (3000 Step-1 iterations; "
                   "3000 / 20000 Step-2 iterations for 4to2 / 4to3; n = 2N + 1)");
  repro_cmd->add_option("--example", repro_example, "Bundled example")->check(CLI::IsMember({1, 2}));
  repro_cmd->add_option("--reduction", repro_reduction, "Order reduction")
      ->check(CLI::IsMember({"4to2", "4to3"}));
  add_batch_flags(repro_cmd, repro_extra);
  repro_cmd->add_option("--n", repro_n, "Override the half-length (0 = 2N + 1)")
      ->check(CLI::Range(0, 64));
  repro_cmd->add_option("--out", repro_out, "Output directory (default example<k>_<reduction>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*reduce_cmd) {
      const HmmModel model = io::load_model(reduce_flags.model);
      const ReductionConfig cfg = make_config(reduce_flags);
      const ReductionResult result = reduce(model, cfg);
      print_warnings(result.warnings);
      const fs::path dir = prepare_out_dir(reduce_flags.out);
      io::write_file(dir / "report.json", io::to_json(result).dump(2) + "\n");
      io::write_file(dir / "reduced.hmm", io::format_model(*result.model_star));
      std::cout << "div1b: " << io::format_real(result.div1b)
                << " div1: " << io::format_real(result.div1)
                << " div2b: " << io::format_real(result.div2b)
                << " div2: " << io::format_real(result.div2)
                << " div: " << io::format_real(result.div_final) << "\n";
    } else if (*batch_cmd) {
      set_threads(batch_extra.threads);
      const HmmModel model = io::load_model(batch_flags.model);
      const ReductionConfig cfg = make_config(batch_flags);
      print_warnings(validate(cfg));
      const ExperimentReport report = run_batch(model, cfg, batch_extra.runs, batch_extra.base_seed);
      std::string label = batch_extra.label;
      if (label.empty()) {
        label = fs::path(batch_flags.model).stem().string() + "_" +
                std::to_string(model.state_size()) + "to" + std::to_string(cfg.target_size);
      }
      write_batch_outputs(prepare_out_dir(batch_flags.out), label, report);
    } else if (*compare_cmd) {
      set_threads(compare_extra.threads);
      const HmmModel model = io::load_model(compare_flags.model);
      ReductionConfig cfg = make_config(compare_flags);
      cfg.step2.checkpoints = default_checkpoints(cfg.step2.max_iterations);
      print_warnings(validate(cfg));
      const Step2Comparison comparison =
          compare_step2_versions(model, cfg, compare_extra.runs, compare_extra.base_seed);
      write_compare_outputs(prepare_out_dir(compare_flags.out), comparison);
    } else if (*hankel_cmd) {
      const HmmModel model = io::load_model(hankel_model);
      const HankelSystem system = build_factors(model, hankel_n);
      if (hankel_out == "-") {
        std::cout << io::hankel_csv(system);
      } else {
        const fs::path out(hankel_out);
        io::write_file(out, io::hankel_csv(system));
        if (hankel_factors) {
          const fs::path stem = out.parent_path() / out.stem();
          io::write_file(stem.string() + "_pi.csv", io::pi_csv(system));
          io::write_file(stem.string() + "_gamma.csv", io::gamma_csv(system));
        }
      }
    } else if (*eval_cmd) {
      const HmmModel a = io::load_model(eval_a);
      const HmmModel b = io::load_model(eval_b);
      std::cout << io::format_real(final_divergence(a, b, eval_n)) << "\n";
    } else if (*repro_cmd) {
      set_threads(repro_extra.threads);
      const ReproducePreset preset = reproduce_preset(repro_example, repro_reduction);
      const HmmModel model = model_from_ab(benchmark_example(preset.example));
      ReductionConfig cfg;
      cfg.target_size = preset.target_size;
      cfg.half_length = repro_n > 0 ? repro_n : preset.half_length;
      cfg.step1.max_iterations = preset.step1_iterations;
      cfg.step2.max_iterations = preset.step2_iterations;
      print_warnings(validate(cfg));
      const fs::path dir = prepare_out_dir(repro_out.empty() ? preset.label : repro_out);
      const ExperimentReport report =
          run_batch(model, cfg, repro_extra.runs, repro_extra.base_seed);
      write_batch_outputs(dir, preset.label, report);
      if (preset.target_size == 2) {
        cfg.step2.checkpoints = default_checkpoints(cfg.step2.max_iterations);
        write_compare_outputs(
            dir, compare_step2_versions(model, cfg, repro_extra.runs, repro_extra.base_seed));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kNumericalError;
  }
  return kOk;
}
