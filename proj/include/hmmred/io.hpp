#ifndef HMMRED_IO_HPP
#define HMMRED_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hmmred/experiments.hpp"
#include "hmmred/hankel.hpp"
#include "hmmred/hmm.hpp"
#include "hmmred/pipeline.hpp"

namespace hmmred::io {

// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string format_real(double value);

// Model files: '#' starts a comment, blank lines are ignored, "key:" opens a
// field whose values follow on the same line and/or the next lines (one
// matrix row per line). Numbers are decimals or fractions "p/q".
//
//   m: 2
//   N: 4
//   A:                 transition matrix, N rows of N values
//   B:                 read-out matrix, N rows of m values
//   M[0]: ... M[m-1]:  alternative to A and B, N rows of N values each
//   pi: ...            optional stationary vector, computed when absent
//
// Symbols are 0-based: column y of B and block M[y] belong to symbol y.
// Rows of A and B (or of sum_y M[y]) within 1e-6 of one are rescaled to sum
// to one exactly; larger deviations are rejected.
HmmModel parse_model(std::string_view text);
HmmModel load_model(const std::filesystem::path& path);

// Writes the M[y] form plus pi at full precision.
std::string format_model(const HmmModel& model);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// CSV of a dense matrix, preceded by one '#' header line.
std::string matrix_csv(const Matrix& matrix, std::string_view header);

// H with a header recording m, n and the row/column orders.
std::string hankel_csv(const HankelSystem& system);
std::string pi_csv(const HankelSystem& system);
std::string gamma_csv(const HankelSystem& system);

// RUN,DIV1b,DIV1,DIV2b,DIV2,DIV; failed runs carry nan.
std::string table_csv(const ExperimentReport& report);
// run,div_final,best
std::string final_divergence_csv(const ExperimentReport& report);
// iteration,R_gamma,R_pi
std::string variability_csv(const Step2Comparison& comparison);
// iteration,mean_div_gamma,mean_div_pi
std::string divergence_decay_csv(const Step2Comparison& comparison);

nlohmann::json to_json(const Matrix& matrix);
nlohmann::json to_json(const ReductionResult& result);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const Step2Comparison& comparison);

}  // namespace hmmred::io

#endif  // HMMRED_IO_HPP
