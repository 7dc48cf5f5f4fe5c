#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "opsplit/operators.hpp"
#include "opsplit/space.hpp"

namespace opsplit {

enum class Algorithm { bsfrb, bsrfb, sfrdr, m_bsfrb, m_bsrfb, m_sfrdr };

const char* to_string(Algorithm alg);
/// Accepts "bsfrb", "m-bsfrb", "m_bsfrb", ... ; throws InvalidArgument otherwise.
Algorithm parse_algorithm(std::string_view name);
bool is_multi(Algorithm alg);
/// m_bsfrb -> bsfrb and so on; four-operator tags map to themselves.
Algorithm base_algorithm(Algorithm alg);
bool needs_lambda(Algorithm alg);

enum class StepsizeMode { strict, permissive };
const char* to_string(StepsizeMode mode);

/// Tolerance by which permissive mode may exceed the bound.
inline constexpr double kPermissiveSlack = 1e-12;

/// Constant `a` of the reflected method's stepsize rule. Returns +inf when
/// beta*L == 0 and the finite limit (17 + sqrt(433)) / 6 when beta*L == inf.
double bsrfb_a(double beta, double lipschitz);

/// Supremum of the admissible stepsize interval. beta = +inf encodes C = 0 and
/// L = 0 encodes B = 0; both use the corresponding limits of the closed forms.
double max_gamma(Algorithm alg, double beta, double lipschitz,
                 std::optional<double> lambda = std::nullopt);

/// Validates (gamma, lambda) against the bound. Returns a warning when a
/// permissive-mode value sits on the boundary; throws InvalidParameter when the
/// value is rejected (the message names the bound).
std::optional<std::string> check_stepsize(Algorithm alg, double gamma,
                                          std::optional<double> lambda, double beta,
                                          double lipschitz, StepsizeMode mode);

/// Operator failure inside an iteration, tagged with the iteration index.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::size_t iteration, const std::string& what);
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// 0 in A1 x + A2 x + B x + C x on R^dim.
struct FourOperatorProblem {
  ResolventOperator a1;
  ResolventOperator a2;
  ForwardOperator b;
  CocoerciveOperator c;
  std::size_t dim;

  /// Throws InvalidArgument if an operator declares a different dimension.
  void validate() const;
};

struct BsfrbState {
  Vector z, y, y_prev;
  Vector b_prev;  // B(y_prev), carried between steps
  std::size_t n = 0;
};

struct BsrfbState {
  Vector z, y, y_prev;
  std::size_t n = 0;
};

struct SfrdrState {
  Vector x, x_prev, u;
  Vector b_prev;  // B(x_prev)
  std::size_t n = 0;
};

/// Empty vectors default to zeros; y_prev defaults to y0 and x_prev to x0.
BsfrbState make_bsfrb_state(const FourOperatorProblem& p, Vector z0 = {}, Vector y0 = {},
                            Vector y_prev = {});
BsrfbState make_bsrfb_state(const FourOperatorProblem& p, Vector z0 = {}, Vector y0 = {},
                            Vector y_prev = {});
SfrdrState make_sfrdr_state(const FourOperatorProblem& p, Vector x0 = {}, Vector u0 = {},
                            Vector x_prev = {});

/// Start with y0 = y_{-1} = J_{gamma A1} z0. With this choice the bsfrb
/// Lyapunov sequence is nonincreasing from the first index.
BsfrbState consistent_bsfrb_start(const FourOperatorProblem& p, Vector z0, double gamma);

/// One iteration each. The bsfrb and bsrfb steps return x_{n+1}; the sfrdr
/// step returns y_{n+1}. Stepsizes are not re-validated here.
Vector step_bsfrb(const FourOperatorProblem& p, BsfrbState& s, double gamma);
Vector step_bsrfb(const FourOperatorProblem& p, BsrfbState& s, double gamma);
Vector step_sfrdr(const FourOperatorProblem& p, SfrdrState& s, double gamma, double lambda);

// ---------------------------------------------------------------------------
// Lyapunov diagnostics

struct LyapunovConstants {
  double a = 1.0;
  double eps = 0.0;
  double eps_prime = 0.0;
};

/// Constants fixed by each convergence argument. For the Douglas-Rachford
/// type method eps is unused and eps_prime is the summability constant.
LyapunovConstants lyapunov_constants(Algorithm alg, double beta, double lipschitz, double gamma,
                                     std::optional<double> lambda = std::nullopt);

/// First index from which V is guaranteed nonincreasing for an arbitrary
/// start with padded history.
std::size_t lyapunov_warmup(Algorithm alg);

struct SplitAnchor {
  Vector z;  // fixed point of the z-sequence
  Vector x;  // J_{gamma A1} z, a solution
};

struct PairAnchor {
  Vector x;
  Vector u;
};

using LyapunovAnchor = std::variant<SplitAnchor, PairAnchor>;

/// Recent iterates, oldest first. Windows are padded with the initial value.
struct SplitHistory {
  std::deque<Vector> z;
  std::deque<Vector> y;
  void push(const Vector& z_new, const Vector& y_new, std::size_t keep);
};

struct PairHistory {
  std::deque<Vector> x;
  std::deque<Vector> u;
  void push(const Vector& x_new, const Vector& u_new, std::size_t keep);
};

/// Needs z_{n-2..n} and y_{n-1..n}.
double lyapunov_bsfrb(const ForwardOperator& b, double beta, double gamma,
                      const SplitAnchor& anchor, const SplitHistory& h,
                      const Metric& metric = Metric::euclidean());
/// Needs z_{n-3..n} and y_{n-2..n}.
double lyapunov_bsrfb(const ForwardOperator& b, double beta, double gamma,
                      const SplitAnchor& anchor, const SplitHistory& h,
                      const Metric& metric = Metric::euclidean());
/// Needs (x, u)_{n-1..n}.
double lyapunov_sfrdr(const ForwardOperator& b, double gamma, double lambda,
                      const PairAnchor& anchor, const PairHistory& h,
                      const Metric& metric = Metric::euclidean());

// ---------------------------------------------------------------------------
// Runs

struct StoppingRule {
  enum class Kind { known_solution, fixed_point };

  Kind kind = Kind::fixed_point;
  double epsilon = 1e-6;
  Vector target;           // known_solution only
  std::size_t offset = 0;  // target compares against iterate[offset, offset + |target|)

  static StoppingRule known_solution(Vector target, double epsilon, std::size_t offset = 0);
  static StoppingRule fixed_point(double epsilon);
};

struct SolverParams {
  Algorithm algorithm = Algorithm::bsfrb;
  double gamma = 0.0;
  std::optional<double> lambda;
  StepsizeMode mode = StepsizeMode::strict;
};

/// Initial vectors; empty means zeros. For the bsfrb/bsrfb families the
/// start is (z0, y0, y_prev); for sfrdr it is (x0, u0, x_prev). Product-space
/// runs replicate each vector across blocks.
struct InitialState {
  Vector z0, y0, y_prev;
  Vector x0, u0, x_prev;
};

struct RunOptions {
  StoppingRule stop;
  std::size_t max_iter = 1000;
  bool keep_iterates = true;
  std::optional<LyapunovAnchor> anchor;
  /// Norm bound beyond which a run counts as diverged.
  double divergence_bound = 1e12;
};

enum class Termination { converged, max_iter, diverged };
const char* to_string(Termination t);

struct IterationRecord {
  std::size_t n = 0;
  Vector iterate;  // monitored sequence (x_n); empty when keep_iterates is off
  double residual = 0.0;
  std::optional<double> distance;
  std::optional<double> lyapunov;
};

/// Final iterates: (z, y) for the split methods, (x, u) for the pair method.
/// Product-space states are flattened block by block.
struct FinalState {
  Vector first;
  Vector second;
  Vector monitor;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  Termination termination = Termination::max_iter;
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
  FinalState final_state;
  std::vector<std::string> warnings;

  const Vector& solution() const { return final_state.monitor; }
  double final_residual() const { return records.empty() ? 0.0 : records.back().residual; }
};

/// Runs a four-operator algorithm. Record 0 holds the start (residual 0);
/// the stopping rule is evaluated from n = 1 on.
RunTrace run(const FourOperatorProblem& p, const SolverParams& params,
             const InitialState& init, const RunOptions& options);

/// Anchor from a high-accuracy solve with the same method and parameters.
LyapunovAnchor presolve_anchor(const FourOperatorProblem& p, const SolverParams& params,
                               double tolerance, std::size_t max_iter);

}  // namespace opsplit
