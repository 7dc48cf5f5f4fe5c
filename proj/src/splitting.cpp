#include "opsplit/splitting.hpp"

#include <cmath>
#include <sstream>

#include "driver.hpp"

namespace opsplit {

// ---------------------------------------------------------------------------
// Tags

const char* to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::bsfrb: return "bsfrb";
    case Algorithm::bsrfb: return "bsrfb";
    case Algorithm::sfrdr: return "sfrdr";
    case Algorithm::m_bsfrb: return "m-bsfrb";
    case Algorithm::m_bsrfb: return "m-bsrfb";
    case Algorithm::m_sfrdr: return "m-sfrdr";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string key(name);
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  for (Algorithm a : {Algorithm::bsfrb, Algorithm::bsrfb, Algorithm::sfrdr, Algorithm::m_bsfrb,
                      Algorithm::m_bsrfb, Algorithm::m_sfrdr}) {
    if (key == to_string(a)) return a;
  }
  throw InvalidArgument("unknown algorithm '" + std::string(name) +
                        "' (expected bsfrb, bsrfb, sfrdr, m-bsfrb, m-bsrfb or m-sfrdr)");
}

bool is_multi(Algorithm alg) {
  return alg == Algorithm::m_bsfrb || alg == Algorithm::m_bsrfb || alg == Algorithm::m_sfrdr;
}

Algorithm base_algorithm(Algorithm alg) {
  switch (alg) {
    case Algorithm::m_bsfrb: return Algorithm::bsfrb;
    case Algorithm::m_bsrfb: return Algorithm::bsrfb;
    case Algorithm::m_sfrdr: return Algorithm::sfrdr;
    default: return alg;
  }
}

bool needs_lambda(Algorithm alg) { return base_algorithm(alg) == Algorithm::sfrdr; }

const char* to_string(StepsizeMode mode) {
  return mode == StepsizeMode::strict ? "strict" : "permissive";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::diverged: return "diverged";
  }
  return "unknown";
}

SolverError::SolverError(std::size_t iteration, const std::string& what)
    : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
      iteration_(iteration) {}

// ---------------------------------------------------------------------------
// Stepsize rules

namespace {

void check_constants(double beta, double lipschitz) {
  if (!(beta > 0.0)) throw InvalidParameter("beta must be positive (use +inf for C = 0)");
  if (!(lipschitz >= 0.0) || std::isinf(lipschitz)) {
    throw InvalidParameter("L must be finite and nonnegative (0 encodes B = 0)");
  }
}

// beta * L with the conventions beta = inf for C = 0 and L = 0 for B = 0.
double product_bl(double beta, double lipschitz) {
  if (lipschitz == 0.0) return 0.0;
  return beta * lipschitz;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

double bsrfb_a(double beta, double lipschitz) {
  check_constants(beta, lipschitz);
  const double t = product_bl(beta, lipschitz);
  if (t == 0.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(t)) return (17.0 + std::sqrt(433.0)) / 6.0;
  const double s = 17.0 * t + 10.0;
  return (s + std::sqrt(s * s + 144.0 * t * t)) / (6.0 * t);
}

double max_gamma(Algorithm alg, double beta, double lipschitz, std::optional<double> lambda) {
  check_constants(beta, lipschitz);
  const double t = product_bl(beta, lipschitz);
  const double inf = std::numeric_limits<double>::infinity();
  switch (base_algorithm(alg)) {
    case Algorithm::bsfrb:
      if (std::isinf(beta)) return lipschitz == 0.0 ? inf : 1.0 / (8.0 * lipschitz);
      return beta / (2.0 * (1.0 + 4.0 * t));
    case Algorithm::bsrfb: {
      const double a = bsrfb_a(beta, lipschitz);
      if (std::isinf(beta)) {
        return lipschitz == 0.0 ? inf : 1.0 / ((10.0 + 6.0 / a) * lipschitz);
      }
      return beta / (5.0 + (10.0 + 6.0 / a) * t);
    }
    case Algorithm::sfrdr: {
      if (!lambda) throw InvalidParameter("lambda required for sfrdr");
      const double lam = *lambda;
      if (!(lam > 0.0) || !std::isfinite(lam)) throw InvalidParameter("lambda must be positive");
      if (std::isinf(beta)) return lam / (1.0 + 2.0 * lam * lipschitz);
      return lam * beta / (beta + lam * (2.0 * t + 1.0));
    }
    default: break;
  }
  throw InvalidArgument("max_gamma: unsupported algorithm");
}

std::optional<std::string> check_stepsize(Algorithm alg, double gamma,
                                          std::optional<double> lambda, double beta,
                                          double lipschitz, StepsizeMode mode) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameter("gamma must be positive and finite");
  }
  const double bound = max_gamma(alg, beta, lipschitz, lambda);
  if (gamma < bound) return std::nullopt;
  const std::string where = std::string(to_string(alg)) + ": gamma = " + format_double(gamma) +
                            " vs stepsize bound " + format_double(bound);
  if (mode == StepsizeMode::strict) {
    throw InvalidParameter(where + " (strict mode requires gamma < bound)");
  }
  if (gamma > bound + kPermissiveSlack) {
    throw InvalidParameter(where + " (exceeds the bound even in permissive mode)");
  }
  return where + " (accepted on the boundary in permissive mode)";
}

// ---------------------------------------------------------------------------
// Problem and states

void FourOperatorProblem::validate() const {
  if (dim == 0) throw InvalidArgument("problem dimension must be positive");
  auto check = [this](std::size_t d, const std::string& name) {
    if (d != 0 && d != dim) {
      throw InvalidArgument("operator '" + name + "' has dimension " + std::to_string(d) +
                            ", problem has " + std::to_string(dim));
    }
  };
  check(a1.dimension(), a1.name());
  check(a2.dimension(), a2.name());
  check(b.dimension(), b.name());
  check(c.dimension(), c.name());
}

using detail::checked;
using detail::expect_dim;
using detail::guarded;
using detail::or_zeros;

BsfrbState make_bsfrb_state(const FourOperatorProblem& p, Vector z0, Vector y0, Vector y_prev) {
  p.validate();
  BsfrbState s;
  s.z = or_zeros(std::move(z0), p.dim, "z0");
  s.y = or_zeros(std::move(y0), p.dim, "y0");
  s.y_prev = y_prev.empty() ? s.y : or_zeros(std::move(y_prev), p.dim, "y_prev");
  s.b_prev = checked(p.b.eval(s.y_prev), p.dim, p.b.name());
  return s;
}

BsrfbState make_bsrfb_state(const FourOperatorProblem& p, Vector z0, Vector y0, Vector y_prev) {
  p.validate();
  BsrfbState s;
  s.z = or_zeros(std::move(z0), p.dim, "z0");
  s.y = or_zeros(std::move(y0), p.dim, "y0");
  s.y_prev = y_prev.empty() ? s.y : or_zeros(std::move(y_prev), p.dim, "y_prev");
  return s;
}

SfrdrState make_sfrdr_state(const FourOperatorProblem& p, Vector x0, Vector u0, Vector x_prev) {
  p.validate();
  SfrdrState s;
  s.x = or_zeros(std::move(x0), p.dim, "x0");
  s.u = or_zeros(std::move(u0), p.dim, "u0");
  s.x_prev = x_prev.empty() ? s.x : or_zeros(std::move(x_prev), p.dim, "x_prev");
  s.b_prev = checked(p.b.eval(s.x_prev), p.dim, p.b.name());
  return s;
}

BsfrbState consistent_bsfrb_start(const FourOperatorProblem& p, Vector z0, double gamma) {
  p.validate();
  z0 = or_zeros(std::move(z0), p.dim, "z0");
  Vector x0 = checked(p.a1.resolve(gamma, z0), p.dim, p.a1.name());
  return make_bsfrb_state(p, std::move(z0), x0, x0);
}

// ---------------------------------------------------------------------------
// Steps. The argument of the second resolvent is grouped as
// ((2x - z) - gamma*(forward term)) - gamma*Cy in every variant, so that
// reductions and product-space rewrites reproduce the same rounding.

Vector step_bsfrb(const FourOperatorProblem& p, BsfrbState& s, double gamma) {
  const std::size_t d = p.dim;
  expect_dim(s.z, d, "z");
  expect_dim(s.y, d, "y");
  expect_dim(s.b_prev, d, "B(y_prev)");
  return guarded(s.n, [&] {
    Vector x = checked(p.a1.resolve(gamma, s.z), d, p.a1.name());
    Vector by = checked(p.b.eval(s.y), d, p.b.name());
    const Vector cy = checked(p.c.eval(s.y), d, p.c.name());
    Vector t(d);
    for (std::size_t i = 0; i < d; ++i) {
      t[i] = ((2.0 * x[i] - s.z[i]) - gamma * (2.0 * by[i] - s.b_prev[i])) - gamma * cy[i];
    }
    Vector y_new = checked(p.a2.resolve(gamma, t), d, p.a2.name());
    for (std::size_t i = 0; i < d; ++i) s.z[i] = y_new[i] + (s.z[i] - x[i]);
    s.y_prev = std::move(s.y);
    s.y = std::move(y_new);
    s.b_prev = std::move(by);
    ++s.n;
    return x;
  });
}

Vector step_bsrfb(const FourOperatorProblem& p, BsrfbState& s, double gamma) {
  const std::size_t d = p.dim;
  expect_dim(s.z, d, "z");
  expect_dim(s.y, d, "y");
  expect_dim(s.y_prev, d, "y_prev");
  return guarded(s.n, [&] {
    Vector x = checked(p.a1.resolve(gamma, s.z), d, p.a1.name());
    Vector r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = 2.0 * s.y[i] - s.y_prev[i];
    const Vector br = checked(p.b.eval(r), d, p.b.name());
    const Vector cy = checked(p.c.eval(s.y), d, p.c.name());
    Vector t(d);
    for (std::size_t i = 0; i < d; ++i) {
      t[i] = ((2.0 * x[i] - s.z[i]) - gamma * br[i]) - gamma * cy[i];
    }
    Vector y_new = checked(p.a2.resolve(gamma, t), d, p.a2.name());
    for (std::size_t i = 0; i < d; ++i) s.z[i] = y_new[i] + (s.z[i] - x[i]);
    s.y_prev = std::move(s.y);
    s.y = std::move(y_new);
    ++s.n;
    return x;
  });
}

Vector step_sfrdr(const FourOperatorProblem& p, SfrdrState& s, double gamma, double lambda) {
  const std::size_t d = p.dim;
  expect_dim(s.x, d, "x");
  expect_dim(s.u, d, "u");
  expect_dim(s.b_prev, d, "B(x_prev)");
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be positive");
  return guarded(s.n, [&] {
    Vector bx = checked(p.b.eval(s.x), d, p.b.name());
    const Vector cx = checked(p.c.eval(s.x), d, p.c.name());
    Vector t(d);
    for (std::size_t i = 0; i < d; ++i) {
      t[i] = ((s.x[i] - gamma * s.u[i]) - gamma * (2.0 * bx[i] - s.b_prev[i])) - gamma * cx[i];
    }
    Vector x_new = checked(p.a2.resolve(gamma, t), d, p.a2.name());
    Vector w(d), v(d);
    for (std::size_t i = 0; i < d; ++i) {
      w[i] = 2.0 * x_new[i] - s.x[i];
      v[i] = w[i] + lambda * s.u[i];
    }
    Vector y_new = checked(p.a1.resolve(lambda, v), d, p.a1.name());
    const double inv = 1.0 / lambda;
    for (std::size_t i = 0; i < d; ++i) s.u[i] = s.u[i] + inv * (w[i] - y_new[i]);
    s.x_prev = std::move(s.x);
    s.x = std::move(x_new);
    s.b_prev = std::move(bx);
    ++s.n;
    return y_new;
  });
}

// ---------------------------------------------------------------------------
// Runs

StoppingRule StoppingRule::known_solution(Vector target, double epsilon, std::size_t offset) {
  StoppingRule r;
  r.kind = Kind::known_solution;
  r.target = std::move(target);
  r.epsilon = epsilon;
  r.offset = offset;
  return r;
}

StoppingRule StoppingRule::fixed_point(double epsilon) {
  StoppingRule r;
  r.kind = Kind::fixed_point;
  r.epsilon = epsilon;
  return r;
}

namespace {

constexpr std::size_t kSplitWindow = 4;
constexpr std::size_t kPairWindow = 2;

template <class State, bool Reflected>
class SplitStepper {
 public:
  SplitStepper(const FourOperatorProblem& p, State s, double gamma,
               std::optional<SplitAnchor> anchor)
      : p_(p), s_(std::move(s)), gamma_(gamma), anchor_(std::move(anchor)), monitor_(s_.z) {
    if (anchor_) {
      expect_dim(anchor_->z, p_.dim, "anchor z");
      expect_dim(anchor_->x, p_.dim, "anchor x");
      for (std::size_t k = 0; k < kSplitWindow; ++k) h_.z.push_back(s_.z);
      h_.y = {s_.y_prev, s_.y_prev, s_.y};
    }
  }

  const Vector& monitor() const { return monitor_; }

  void advance() {
    z_old_ = s_.z;
    if constexpr (Reflected) {
      monitor_ = step_bsrfb(p_, s_, gamma_);
    } else {
      monitor_ = step_bsfrb(p_, s_, gamma_);
    }
    if (anchor_) h_.push(s_.z, s_.y, kSplitWindow);
  }

  double residual() const { return distance(s_.z, z_old_); }

  bool healthy(double bound) const {
    return detail::bounded(s_.z, bound) && all_finite(s_.y) && all_finite(monitor_);
  }

  std::optional<double> lyapunov() const {
    if (!anchor_) return std::nullopt;
    if constexpr (Reflected) {
      return lyapunov_bsrfb(p_.b, p_.c.beta(), gamma_, *anchor_, h_);
    } else {
      return lyapunov_bsfrb(p_.b, p_.c.beta(), gamma_, *anchor_, h_);
    }
  }

  FinalState final_state() const { return {s_.z, s_.y, monitor_}; }

 private:
  const FourOperatorProblem& p_;
  State s_;
  double gamma_;
  std::optional<SplitAnchor> anchor_;
  SplitHistory h_;
  Vector monitor_, z_old_;
};

class PairStepper {
 public:
  PairStepper(const FourOperatorProblem& p, SfrdrState s, double gamma, double lambda,
              std::optional<PairAnchor> anchor)
      : p_(p), s_(std::move(s)), gamma_(gamma), lambda_(lambda), anchor_(std::move(anchor)) {
    if (anchor_) {
      expect_dim(anchor_->x, p_.dim, "anchor x");
      expect_dim(anchor_->u, p_.dim, "anchor u");
      h_.x = {s_.x_prev, s_.x};
      h_.u = {s_.u, s_.u};
    }
  }

  const Vector& monitor() const { return s_.x; }

  void advance() {
    x_old_ = s_.x;
    u_old_ = s_.u;
    step_sfrdr(p_, s_, gamma_, lambda_);
    if (anchor_) h_.push(s_.x, s_.u, kPairWindow);
  }

  double residual() const {
    return detail::pair_residual(subtract(s_.x, x_old_), subtract(s_.u, u_old_), gamma_, lambda_,
                                 Metric::euclidean());
  }

  bool healthy(double bound) const {
    return detail::bounded(s_.x, bound) && detail::bounded(s_.u, bound);
  }

  std::optional<double> lyapunov() const {
    if (!anchor_) return std::nullopt;
    return lyapunov_sfrdr(p_.b, gamma_, lambda_, *anchor_, h_);
  }

  FinalState final_state() const { return {s_.x, s_.u, s_.x}; }

 private:
  const FourOperatorProblem& p_;
  SfrdrState s_;
  double gamma_, lambda_;
  std::optional<PairAnchor> anchor_;
  PairHistory h_;
  Vector x_old_, u_old_;
};

template <class A>
std::optional<A> anchor_as(const std::optional<LyapunovAnchor>& anchor, Algorithm alg) {
  if (!anchor) return std::nullopt;
  if (const A* a = std::get_if<A>(&*anchor)) return *a;
  throw InvalidArgument(std::string("Lyapunov anchor has the wrong shape for ") + to_string(alg));
}

}  // namespace

RunTrace run(const FourOperatorProblem& p, const SolverParams& params, const InitialState& init,
             const RunOptions& options) {
  p.validate();
  if (is_multi(params.algorithm)) {
    throw InvalidArgument(std::string(to_string(params.algorithm)) +
                          " needs a product-space problem (use run_m)");
  }
  detail::validate_options(options);
  std::vector<std::string> warnings;
  if (auto w = check_stepsize(params.algorithm, params.gamma, params.lambda, p.c.beta(),
                              p.b.lipschitz(), params.mode)) {
    warnings.push_back(*w);
  }
  switch (params.algorithm) {
    case Algorithm::bsfrb: {
      SplitStepper<BsfrbState, false> st(p, make_bsfrb_state(p, init.z0, init.y0, init.y_prev),
                                         params.gamma,
                                         anchor_as<SplitAnchor>(options.anchor, params.algorithm));
      return detail::drive(st, options, std::move(warnings));
    }
    case Algorithm::bsrfb: {
      SplitStepper<BsrfbState, true> st(p, make_bsrfb_state(p, init.z0, init.y0, init.y_prev),
                                        params.gamma,
                                        anchor_as<SplitAnchor>(options.anchor, params.algorithm));
      return detail::drive(st, options, std::move(warnings));
    }
    case Algorithm::sfrdr: {
      PairStepper st(p, make_sfrdr_state(p, init.x0, init.u0, init.x_prev), params.gamma,
                     *params.lambda, anchor_as<PairAnchor>(options.anchor, params.algorithm));
      return detail::drive(st, options, std::move(warnings));
    }
    default: break;
  }
  throw InvalidArgument("run: unsupported algorithm");
}

LyapunovAnchor presolve_anchor(const FourOperatorProblem& p, const SolverParams& params,
                               double tolerance, std::size_t max_iter) {
  RunOptions opt;
  opt.stop = StoppingRule::fixed_point(tolerance);
  opt.max_iter = max_iter;
  opt.keep_iterates = false;
  const RunTrace t = run(p, params, InitialState{}, opt);
  if (t.termination != Termination::converged) {
    throw SolverError(t.iterations, "anchor pre-solve did not reach tolerance " +
                                        format_double(tolerance));
  }
  if (base_algorithm(params.algorithm) == Algorithm::sfrdr) {
    return PairAnchor{t.final_state.first, t.final_state.second};
  }
  Vector x = p.a1.resolve(params.gamma, t.final_state.first);
  return SplitAnchor{t.final_state.first, std::move(x)};
}

}  // namespace opsplit
