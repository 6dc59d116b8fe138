#include "hmmred/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "hmmred/error.hpp"

namespace hmmred::io {
namespace {

using Rows = std::vector<std::vector<double>>;

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

double parse_number(const std::string& token, int line) {
  auto fail = [&]() -> double {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": '" + token +
                                       "' is not a number");
  };
  auto parse_plain = [&](std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail();
    return value;
  };
  double value = 0.0;
  if (const auto slash = token.find('/'); slash != std::string::npos) {
    const double num = parse_plain(std::string_view(token).substr(0, slash));
    const double den = parse_plain(std::string_view(token).substr(slash + 1));
    if (den == 0.0) fail();
    value = num / den;
  } else {
    value = parse_plain(token);
  }
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": entry '" + token +
                                       "' must be a finite nonnegative number");
  }
  return value;
}

struct Field {
  int line = 0;
  Rows rows;
};

std::map<std::string, Field> tokenize(std::string_view text) {
  std::map<std::string, Field> fields;
  Field* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    if (const auto colon = line.find(':'); colon != std::string::npos) {
      const std::string key = trim(line.substr(0, colon));
      if (key.empty()) throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": empty key");
      if (fields.count(key)) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      }
      current = &fields[key];
      current->line = line_no;
      line = trim(line.substr(colon + 1));
      if (line.empty()) continue;
    }
    if (current == nullptr) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": values before any key");
    }
    std::istringstream tokens(line);
    std::vector<double> row;
    std::string token;
    while (tokens >> token) row.push_back(parse_number(token, line_no));
    current->rows.push_back(std::move(row));
  }
  return fields;
}

int scalar_field(const std::map<std::string, Field>& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw Error(ErrorKind::kParse, "missing field '" + key + "'");
  const Rows& rows = it->second.rows;
  if (rows.size() != 1 || rows[0].size() != 1 || rows[0][0] != std::floor(rows[0][0]) ||
      rows[0][0] < 1) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(it->second.line) + ": '" + key +
                                       "' must be a positive integer");
  }
  return static_cast<int>(rows[0][0]);
}

Matrix matrix_field(const std::map<std::string, Field>& fields, const std::string& key, int rows,
                    int cols) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw Error(ErrorKind::kParse, "missing field '" + key + "'");
  const Rows& data = it->second.rows;
  if (static_cast<int>(data.size()) != rows) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(it->second.line) + ": '" + key +
                                       "' needs " + std::to_string(rows) + " rows, got " +
                                       std::to_string(data.size()));
  }
  Matrix out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(data[r].size()) != cols) {
      throw Error(ErrorKind::kParse, "'" + key + "' row " + std::to_string(r) + " needs " +
                                         std::to_string(cols) + " values, got " +
                                         std::to_string(data[r].size()));
    }
    for (int c = 0; c < cols; ++c) out(r, c) = data[r][c];
  }
  return out;
}

std::string format_row(const auto& row) {
  std::string out;
  for (Index c = 0; c < row.size(); ++c) {
    if (c) out += ',';
    out += format_real(row(c));
  }
  return out;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

HmmModel parse_model(std::string_view text) {
  const auto fields = tokenize(text);
  const int m = scalar_field(fields, "m");
  const int n = scalar_field(fields, "N");
  for (const auto& [key, field] : fields) {
    const bool known = key == "m" || key == "N" || key == "A" || key == "B" || key == "pi" ||
                       (key.rfind("M[", 0) == 0 && key.back() == ']');
    if (!known) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(field.line) + ": unknown field '" + key + "'");
    }
  }

  std::vector<Matrix> M;
  const bool has_ab = fields.count("A") || fields.count("B");
  const bool has_m = fields.count("M[0]") > 0;
  if (has_ab == has_m) {
    throw Error(ErrorKind::kParse, "give either A and B or the list M[0] .. M[m-1]");
  }
  if (has_ab) {
    AbSpec spec;
    spec.A = renormalize_rows(matrix_field(fields, "A", n, n), "A");
    spec.B = renormalize_rows(matrix_field(fields, "B", n, m), "B");
    if (!fields.count("pi")) return model_from_ab(spec);
    require_row_stochastic(spec.A, "A");
    require_row_stochastic(spec.B, "B");
    for (int y = 0; y < m; ++y) M.emplace_back(spec.A * spec.B.col(y).asDiagonal());
  } else {
    Matrix A = Matrix::Zero(n, n);
    for (int y = 0; y < m; ++y) {
      M.push_back(matrix_field(fields, "M[" + std::to_string(y) + "]", n, n));
      A += M.back();
    }
    if (fields.count("M[" + std::to_string(m) + "]")) {
      throw Error(ErrorKind::kParse, "more M[y] blocks than m = " + std::to_string(m));
    }
    renormalize_rows(A, "sum_y M[y]");  // rejects rows too far from one
    for (int r = 0; r < n; ++r) {
      const double sum = A.row(r).sum();
      if (std::abs(sum - 1.0) <= kStochasticTolerance) continue;
      for (auto& block : M) block.row(r) /= sum;
    }
  }
  if (fields.count("pi")) {
    const Matrix pi = matrix_field(fields, "pi", 1, n);
    return HmmModel(std::move(M), RowVector(pi.row(0)));
  }
  return HmmModel::from_matrices(std::move(M));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

HmmModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

std::string format_model(const HmmModel& model) {
  std::ostringstream out;
  out << "m: " << model.alphabet_size() << "\n";
  out << "N: " << model.state_size() << "\n";
  for (int y = 0; y < model.alphabet_size(); ++y) {
    out << "M[" << y << "]:\n";
    const Matrix& block = model.emission_transition(y);
    for (Index r = 0; r < block.rows(); ++r) {
      for (Index c = 0; c < block.cols(); ++c) out << (c ? " " : "") << format_real(block(r, c));
      out << "\n";
    }
  }
  out << "pi:";
  for (Index i = 0; i < model.state_size(); ++i) out << " " << format_real(model.stationary()(i));
  out << "\n";
  return out.str();
}

std::string matrix_csv(const Matrix& matrix, std::string_view header) {
  std::string out = "# ";
  out += header;
  out += '\n';
  for (Index r = 0; r < matrix.rows(); ++r) {
    out += format_row(matrix.row(r));
    out += '\n';
  }
  return out;
}

std::string hankel_csv(const HankelSystem& system) {
  std::ostringstream header;
  header << "H m=" << system.alphabet_size << " n=" << system.half_length
         << " rows=first-lexical(first symbol least significant)"
         << " cols=last-lexical(first symbol most significant) symbols=0-based";
  return matrix_csv(system.H, header.str());
}

std::string pi_csv(const HankelSystem& system) {
  std::ostringstream header;
  header << "Pi m=" << system.alphabet_size << " n=" << system.half_length
         << " rows=first-lexical(first symbol least significant) cols=states";
  return matrix_csv(system.Pi, header.str());
}

std::string gamma_csv(const HankelSystem& system) {
  std::ostringstream header;
  header << "Gamma m=" << system.alphabet_size << " n=" << system.half_length
         << " rows=states cols=last-lexical(first symbol most significant)";
  return matrix_csv(system.Gamma, header.str());
}

std::string table_csv(const ExperimentReport& report) {
  std::string out = "RUN,DIV1b,DIV1,DIV2b,DIV2,DIV\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.run);
    if (row.ok) {
      for (double v : {row.div1b, row.div1, row.div2b, row.div2, row.div_final}) {
        out += ',';
        out += format_real(v);
      }
    } else {
      out += ",nan,nan,nan,nan,nan";
    }
    out += '\n';
  }
  return out;
}

std::string final_divergence_csv(const ExperimentReport& report) {
  std::string out = "run,div_final,best\n";
  for (std::size_t t = 0; t < report.rows.size(); ++t) {
    const auto& row = report.rows[t];
    out += std::to_string(row.run) + ',' + (row.ok ? format_real(row.div_final) : "nan") + ',' +
           (report.best_run && *report.best_run == static_cast<int>(t) ? "1" : "0") + '\n';
  }
  return out;
}

std::string variability_csv(const Step2Comparison& comparison) {
  std::string out = "iteration,R_gamma,R_pi\n";
  const auto& g = comparison.gamma.variability_curve;
  const auto& p = comparison.pi.variability_curve;
  for (std::size_t i = 0; i < std::min(g.size(), p.size()); ++i) {
    out += std::to_string(g[i].first) + ',' + format_real(g[i].second) + ',' +
           format_real(p[i].second) + '\n';
  }
  return out;
}

std::string divergence_decay_csv(const Step2Comparison& comparison) {
  std::string out = "iteration,mean_div_gamma,mean_div_pi\n";
  const auto& g = comparison.gamma.mean_trace;
  const auto& p = comparison.pi.mean_trace;
  for (std::size_t i = 0; i < std::min(g.size(), p.size()); ++i) {
    out += std::to_string(i) + ',' + format_real(g[i]) + ',' + format_real(p[i]) + '\n';
  }
  return out;
}

nlohmann::json to_json(const Matrix& matrix) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < matrix.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < matrix.cols(); ++c) row.push_back(matrix(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const ReductionResult& result) {
  nlohmann::json j;
  j["seed"] = result.seed;
  j["half_length"] = result.half_length;
  j["eval_half_length"] = result.eval_half_length;
  j["step2_version"] = std::string(to_string(result.step2_version));
  j["iterations"] = {{"step1", result.step1_iterations}, {"step2", result.step2_iterations}};
  j["divergence"] = {{"div1b", result.div1b}, {"div1", result.div1},   {"div2b", result.div2b},
                     {"div2", result.div2},   {"div", result.div_final}};
  j["M"] = to_json(result.m_concat);
  j["A"] = to_json(result.transition);
  j["pi"] = to_json(Matrix(result.stationary));
  j["warnings"] = result.warnings;
  return j;
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r{{"run", row.run}, {"seed", row.seed}, {"ok", row.ok}};
    if (row.ok) {
      r["divergence"] = {{"div1b", row.div1b}, {"div1", row.div1}, {"div2b", row.div2b},
                         {"div2", row.div2},   {"div", row.div_final}};
      r["M"] = to_json(row.m_concat);
    } else {
      r["error"] = row.error;
    }
    rows.push_back(std::move(r));
  }
  j["runs"] = std::move(rows);
  j["variability"] = report.variability ? nlohmann::json(*report.variability) : nlohmann::json();
  j["best_run"] = report.best_run ? nlohmann::json(*report.best_run + 1) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const Step2Comparison& comparison) {
  auto summary = [](const VersionSummary& s) {
    return nlohmann::json{{"version", std::string(to_string(s.version))},
                          {"variability", s.variability},
                          {"mean_M", to_json(s.mean_m)},
                          {"div2b", s.div2b},
                          {"div2", s.div2}};
  };
  return nlohmann::json{{"step1_divergence", comparison.step1.trace.back()},
                        {"gamma", summary(comparison.gamma)},
                        {"pi", summary(comparison.pi)},
                        {"mean_difference", comparison.mean_difference}};
}

}  // namespace hmmred::io
