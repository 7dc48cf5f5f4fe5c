#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "opsplit/problems.hpp"
#include "opsplit/splitting.hpp"

namespace opsplit {

/// Malformed or semantically invalid run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetCase {
  Vector f;
  std::optional<Vector> solution;
};

struct ProblemConfig {
  enum class Kind { minkowski, synthetic };
  Kind kind = Kind::minkowski;
  std::vector<ConvexSet> sets;
  std::vector<TargetCase> cases;  // one per f
  // synthetic only
  std::size_t dim = 0;
  std::vector<double> skew;
};

struct InitConfig {
  enum class Kind { zeros, random, given };
  Kind kind = Kind::zeros;
  InitialState given;
};

struct RunConfig {
  ProblemConfig problem;
  Algorithm algorithm = Algorithm::m_bsfrb;
  std::vector<double> gammas;
  std::vector<double> lambdas;  // sfrdr family only
  std::optional<std::vector<double>> weights;
  InitConfig init;
  StoppingRule::Kind stop_rule = StoppingRule::Kind::known_solution;
  double epsilon = 1e-6;
  std::size_t max_iter = 5000;
  StepsizeMode mode = StepsizeMode::strict;
  std::string output_dir;  // empty: no files written
  bool lyapunov = false;
  std::uint64_t seed = 0;
  double anchor_tolerance = 1e-10;
};

/// Parses a JSON run configuration. Unknown keys are rejected; messages
/// carry the line (syntax errors) or the key path (semantic errors).
/// `mode_override` replaces the configured stepsize mode before validation.
RunConfig parse_config(const std::string& path,
                       std::optional<StepsizeMode> mode_override = std::nullopt);
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>",
                            std::optional<StepsizeMode> mode_override = std::nullopt);

/// Semantic checks, including every stepsize against its bound.
void validate_config(const RunConfig& cfg);

struct SummaryRow {
  std::size_t case_index = 0;
  Vector f;
  double gamma = 0.0;
  std::optional<double> lambda;
  std::size_t iterations = 0;
  double seconds = 0.0;
  double residual = 0.0;
  std::optional<double> distance;
  Termination termination = Termination::max_iter;
  std::string trace_name;
};

struct TableResult {
  Algorithm algorithm = Algorithm::m_bsfrb;
  std::vector<SummaryRow> rows;
  std::vector<RunTrace> traces;  // parallel to rows
  std::vector<std::string> warnings;

  bool all_converged() const;
};

/// Runs every (f, gamma[, lambda]) combination sequentially, in that order.
/// Failed runs become rows flagged max_iter or diverged.
TableResult run_table(const RunConfig& cfg);

/// Shortest decimal that round-trips to the same double.
std::string format_shortest(double v);

/// Columns n, residual, dist_to_solution, lyapunov (empty cells when absent).
std::string trace_csv(const RunTrace& trace);
/// One line per row; timing is omitted so output stays reproducible.
std::string summary_csv(const TableResult& table);
/// Aligned text table with Iter and Time(s) columns.
std::string format_table(const TableResult& table);

/// Writes summary.csv and one trace CSV per row into `dir` (created if
/// missing). Throws std::runtime_error naming the file on I/O failure.
void write_outputs(const TableResult& table, const std::string& dir);

}  // namespace opsplit
