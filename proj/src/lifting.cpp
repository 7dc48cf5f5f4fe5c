#include "opsplit/lifting.hpp"

#include <cmath>

#include "driver.hpp"

namespace opsplit {

using detail::checked;
using detail::guarded;

void MOperatorProblem::validate() const {
  if (a.empty()) throw InvalidArgument("product-space problem needs at least one operator");
  if (w.size() != a.size()) {
    throw InvalidArgument("expected " + std::to_string(a.size()) + " weights, got " +
                          std::to_string(w.size()));
  }
  if (dim == 0) throw InvalidArgument("problem dimension must be positive");
  auto check = [this](std::size_t d, const std::string& name) {
    if (d != 0 && d != dim) {
      throw InvalidArgument("operator '" + name + "' has dimension " + std::to_string(d) +
                            ", problem has " + std::to_string(dim));
    }
  };
  for (const auto& op : a) check(op.dimension(), op.name());
  check(b.dimension(), b.name());
  check(c.dimension(), c.name());
}

// ---------------------------------------------------------------------------
// Product-space primitives

LiftedPoint lift(const Vector& x, std::size_t m) {
  if (m == 0) throw InvalidArgument("lift: m must be at least 1");
  return LiftedPoint(m, x);
}

LiftedPoint project_diagonal(const WeightVector& w, const LiftedPoint& p) {
  return LiftedPoint(p.size(), weighted_average(w, p));
}

LiftedPoint lifted_resolvent(const std::vector<ResolventOperator>& a, const WeightVector& w,
                             double gamma, const LiftedPoint& p) {
  if (a.size() != w.size() || p.size() != a.size()) {
    throw InvalidArgument("lifted_resolvent: operator, weight and block counts differ");
  }
  LiftedPoint out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = a[i].resolve(gamma / w[i], p[i]);
  return out;
}

ResolventOperator diagonal_normal_cone(const WeightVector& w, std::size_t dim) {
  return ResolventOperator(
      [w, dim](double, std::span<const double> v) {
        const Vector avg = weighted_average_flat(w, v, dim);
        Vector out;
        out.reserve(v.size());
        for (std::size_t i = 0; i < w.size(); ++i) out.insert(out.end(), avg.begin(), avg.end());
        return out;
      },
      "diagonal", w.size() * dim);
}

ResolventOperator lifted_resolvent_operator(const std::vector<ResolventOperator>& a,
                                            const WeightVector& w, std::size_t dim) {
  if (a.size() != w.size()) throw InvalidArgument("lifted resolvent: weight count differs");
  return ResolventOperator(
      [a, w, dim](double gamma, std::span<const double> v) {
        Vector out;
        out.reserve(v.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
          const Vector r = a[i].resolve(gamma / w[i], v.subspan(i * dim, dim));
          out.insert(out.end(), r.begin(), r.end());
        }
        return out;
      },
      "lifted", a.size() * dim);
}

namespace {

template <class Op>
std::function<Vector(std::span<const double>)> blockwise(Op op, std::size_t m, std::size_t dim) {
  return [op = std::move(op), m, dim](std::span<const double> v) {
    Vector out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < m; ++i) {
      const Vector r = op.eval(v.subspan(i * dim, dim));
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  };
}

}  // namespace

ForwardOperator lifted_forward(const ForwardOperator& b, std::size_t m, std::size_t dim) {
  if (b.is_zero()) return ForwardOperator::zero(m * dim);
  return ForwardOperator(blockwise(b, m, dim), b.lipschitz(), "lifted " + b.name(), m * dim);
}

CocoerciveOperator lifted_cocoercive(const CocoerciveOperator& c, std::size_t m,
                                     std::size_t dim) {
  if (c.is_zero()) return CocoerciveOperator::zero(m * dim);
  return CocoerciveOperator(blockwise(c, m, dim), c.beta(), "lifted " + c.name(), m * dim);
}

FourOperatorProblem lifted_problem(const MOperatorProblem& p, Algorithm alg) {
  p.validate();
  const std::size_t m = p.m();
  ResolventOperator diag = diagonal_normal_cone(p.w, p.dim);
  ResolventOperator blocks = lifted_resolvent_operator(p.a, p.w, p.dim);
  ForwardOperator b = lifted_forward(p.b, m, p.dim);
  CocoerciveOperator c = lifted_cocoercive(p.c, m, p.dim);
  if (base_algorithm(alg) == Algorithm::sfrdr) {
    return FourOperatorProblem{std::move(blocks), std::move(diag), std::move(b), std::move(c),
                               m * p.dim};
  }
  return FourOperatorProblem{std::move(diag), std::move(blocks), std::move(b), std::move(c),
                             m * p.dim};
}

Metric product_metric(const MOperatorProblem& p) { return Metric::weighted(p.w, p.dim); }

// ---------------------------------------------------------------------------
// States

namespace {

std::vector<Vector> blocks_from(const Vector& v, std::size_t m, std::size_t dim,
                                const char* what) {
  if (v.empty()) return std::vector<Vector>(m, Vector(dim, 0.0));
  if (v.size() == dim) return std::vector<Vector>(m, v);
  if (v.size() == m * dim) return split_blocks(v, dim);
  throw InvalidArgument(std::string(what) + ": expected length " + std::to_string(dim) + " or " +
                        std::to_string(m * dim) + ", got " + std::to_string(v.size()));
}

void expect_blocks(const std::vector<Vector>& b, std::size_t m, std::size_t dim,
                   const char* what) {
  if (b.size() != m) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(m) + " blocks, got " +
                          std::to_string(b.size()));
  }
  for (const auto& v : b) detail::expect_dim(v, dim, what);
}

}  // namespace

MSplitState make_m_split_state(const MOperatorProblem& p, Algorithm alg, const Vector& z0,
                               const Vector& y0, const Vector& y_prev) {
  p.validate();
  const std::size_t m = p.m();
  MSplitState s;
  s.z = blocks_from(z0, m, p.dim, "z0");
  s.y = blocks_from(y0, m, p.dim, "y0");
  s.y_prev = y_prev.empty() ? s.y : blocks_from(y_prev, m, p.dim, "y_prev");
  if (base_algorithm(alg) == Algorithm::bsfrb) {
    for (const auto& v : s.y_prev) s.b_prev.push_back(checked(p.b.eval(v), p.dim, p.b.name()));
  }
  return s;
}

MSfrdrState make_m_sfrdr_state(const MOperatorProblem& p, const Vector& x0, const Vector& u0,
                               const Vector& x_prev) {
  p.validate();
  MSfrdrState s;
  s.x = detail::or_zeros(x0, p.dim, "x0");
  s.x_prev = x_prev.empty() ? s.x : detail::or_zeros(x_prev, p.dim, "x_prev");
  s.u = blocks_from(u0, p.m(), p.dim, "u0");
  s.b_prev = checked(p.b.eval(s.x_prev), p.dim, p.b.name());
  return s;
}

// ---------------------------------------------------------------------------
// Steps. Each block reproduces the arithmetic of the two-operator step on the
// lifted problem, so the product-space rewrite is exact in floating point.

namespace {

template <bool Reflected>
Vector step_m_split(const MOperatorProblem& p, MSplitState& s, double gamma,
                    std::vector<Vector>* inputs) {
  const std::size_t m = p.m();
  const std::size_t d = p.dim;
  expect_blocks(s.z, m, d, "z");
  expect_blocks(s.y, m, d, "y");
  expect_blocks(s.y_prev, m, d, "y_prev");
  if (!Reflected) expect_blocks(s.b_prev, m, d, "B(y_prev)");
  return guarded(s.n, [&] {
    Vector x = weighted_average(p.w, s.z);
    if (inputs) inputs->assign(m, Vector{});
    for (std::size_t i = 0; i < m; ++i) {
      Vector& z = s.z[i];
      Vector& y = s.y[i];
      const Vector cy = checked(p.c.eval(y), d, p.c.name());
      Vector t(d);
      if constexpr (Reflected) {
        Vector r(d);
        for (std::size_t k = 0; k < d; ++k) r[k] = 2.0 * y[k] - s.y_prev[i][k];
        const Vector br = checked(p.b.eval(r), d, p.b.name());
        for (std::size_t k = 0; k < d; ++k) {
          t[k] = ((2.0 * x[k] - z[k]) - gamma * br[k]) - gamma * cy[k];
        }
      } else {
        Vector by = checked(p.b.eval(y), d, p.b.name());
        for (std::size_t k = 0; k < d; ++k) {
          t[k] = ((2.0 * x[k] - z[k]) - gamma * (2.0 * by[k] - s.b_prev[i][k])) - gamma * cy[k];
        }
        s.b_prev[i] = std::move(by);
      }
      Vector y_new = checked(p.a[i].resolve(gamma / p.w[i], t), d, p.a[i].name());
      for (std::size_t k = 0; k < d; ++k) z[k] = y_new[k] + (z[k] - x[k]);
      s.y_prev[i] = std::move(y);
      y = std::move(y_new);
      if (inputs) (*inputs)[i] = std::move(t);
    }
    ++s.n;
    return x;
  });
}

}  // namespace

Vector step_m_bsfrb(const MOperatorProblem& p, MSplitState& s, double gamma,
                    std::vector<Vector>* inputs) {
  return step_m_split<false>(p, s, gamma, inputs);
}

Vector step_m_bsrfb(const MOperatorProblem& p, MSplitState& s, double gamma,
                    std::vector<Vector>* inputs) {
  return step_m_split<true>(p, s, gamma, inputs);
}

std::vector<Vector> step_m_sfrdr(const MOperatorProblem& p, MSfrdrState& s, double gamma,
                                 double lambda, std::vector<Vector>* inputs) {
  const std::size_t m = p.m();
  const std::size_t d = p.dim;
  detail::expect_dim(s.x, d, "x");
  detail::expect_dim(s.b_prev, d, "B(x_prev)");
  expect_blocks(s.u, m, d, "u");
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be positive");
  return guarded(s.n, [&] {
    Vector bx = checked(p.b.eval(s.x), d, p.b.name());
    const Vector cx = checked(p.c.eval(s.x), d, p.c.name());
    // The average is taken over the per-block arguments, as the diagonal
    // projection of the lifted method does.
    std::vector<Vector> args(m, Vector(d));
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        args[j][k] =
            ((s.x[k] - gamma * s.u[j][k]) - gamma * (2.0 * bx[k] - s.b_prev[k])) - gamma * cx[k];
      }
    }
    Vector x_new = weighted_average(p.w, args);
    Vector w(d);
    for (std::size_t k = 0; k < d; ++k) w[k] = 2.0 * x_new[k] - s.x[k];
    const double inv = 1.0 / lambda;
    std::vector<Vector> ys(m);
    if (inputs) inputs->assign(m, Vector{});
    for (std::size_t i = 0; i < m; ++i) {
      Vector v(d);
      for (std::size_t k = 0; k < d; ++k) v[k] = w[k] + lambda * s.u[i][k];
      ys[i] = checked(p.a[i].resolve(lambda / p.w[i], v), d, p.a[i].name());
      for (std::size_t k = 0; k < d; ++k) s.u[i][k] = s.u[i][k] + inv * (w[k] - ys[i][k]);
      if (inputs) (*inputs)[i] = std::move(v);
    }
    s.x_prev = std::move(s.x);
    s.x = std::move(x_new);
    s.b_prev = std::move(bx);
    ++s.n;
    return ys;
  });
}

BsfrbState to_lifted_bsfrb(const MOperatorProblem& p, const MSplitState& s) {
  BsfrbState out;
  out.z = concat_blocks(s.z);
  out.y = concat_blocks(s.y);
  out.y_prev = concat_blocks(s.y_prev);
  if (s.b_prev.size() == s.y_prev.size()) {
    out.b_prev = concat_blocks(s.b_prev);
  } else {
    out.b_prev = lifted_forward(p.b, p.m(), p.dim).eval(out.y_prev);
  }
  out.n = s.n;
  return out;
}

BsrfbState to_lifted_bsrfb(const MSplitState& s) {
  BsrfbState out;
  out.z = concat_blocks(s.z);
  out.y = concat_blocks(s.y);
  out.y_prev = concat_blocks(s.y_prev);
  out.n = s.n;
  return out;
}

SfrdrState to_lifted_sfrdr(const MOperatorProblem& p, const MSfrdrState& s) {
  SfrdrState out;
  out.x = concat_blocks(lift(s.x, p.m()));
  out.x_prev = concat_blocks(lift(s.x_prev, p.m()));
  out.u = concat_blocks(s.u);
  out.b_prev = concat_blocks(lift(s.b_prev, p.m()));
  out.n = s.n;
  return out;
}

// ---------------------------------------------------------------------------
// Implied subgradients

namespace {

std::vector<Vector> subgradients_from(const MOperatorProblem& p, const std::vector<Vector>& in,
                                      const std::vector<Vector>& out, double param) {
  std::vector<Vector> a(p.m(), Vector(p.dim));
  for (std::size_t i = 0; i < p.m(); ++i) {
    const double scale = p.w[i] / param;
    for (std::size_t k = 0; k < p.dim; ++k) a[i][k] = scale * (in[i][k] - out[i][k]);
  }
  return a;
}

}  // namespace

std::vector<Vector> implied_subgradients(const MOperatorProblem& p, Algorithm alg,
                                         const MSplitState& s, double gamma) {
  MSplitState trial = s;
  std::vector<Vector> inputs;
  if (base_algorithm(alg) == Algorithm::bsrfb) {
    step_m_bsrfb(p, trial, gamma, &inputs);
  } else if (base_algorithm(alg) == Algorithm::bsfrb) {
    step_m_bsfrb(p, trial, gamma, &inputs);
  } else {
    throw InvalidArgument("implied_subgradients: split state given for a pair method");
  }
  return subgradients_from(p, inputs, trial.y, gamma);
}

std::vector<Vector> implied_subgradients(const MOperatorProblem& p, const MSfrdrState& s,
                                         double gamma, double lambda) {
  MSfrdrState trial = s;
  std::vector<Vector> inputs;
  const std::vector<Vector> ys = step_m_sfrdr(p, trial, gamma, lambda, &inputs);
  return subgradients_from(p, inputs, ys, lambda);
}

// ---------------------------------------------------------------------------
// Runs

namespace {

constexpr std::size_t kSplitWindow = 4;

template <bool Reflected>
class MSplitStepper {
 public:
  MSplitStepper(const MOperatorProblem& p, MSplitState s, double gamma,
                std::optional<SplitAnchor> anchor)
      : p_(p),
        s_(std::move(s)),
        gamma_(gamma),
        metric_(product_metric(p)),
        anchor_(std::move(anchor)),
        monitor_(weighted_average(p.w, s_.z)) {
    if (anchor_) {
      lifted_b_.emplace(lifted_forward(p_.b, p_.m(), p_.dim));
      const Vector z = concat_blocks(s_.z);
      for (std::size_t k = 0; k < kSplitWindow; ++k) h_.z.push_back(z);
      const Vector yp = concat_blocks(s_.y_prev);
      h_.y = {yp, yp, concat_blocks(s_.y)};
    }
  }

  const Vector& monitor() const { return monitor_; }

  void advance() {
    z_old_ = concat_blocks(s_.z);
    if constexpr (Reflected) {
      monitor_ = step_m_bsrfb(p_, s_, gamma_);
    } else {
      monitor_ = step_m_bsfrb(p_, s_, gamma_);
    }
    z_new_ = concat_blocks(s_.z);
    if (anchor_) h_.push(z_new_, concat_blocks(s_.y), kSplitWindow);
  }

  double residual() const { return std::sqrt(metric_.norm_sq(subtract(z_new_, z_old_))); }

  bool healthy(double bound) const {
    if (!all_finite(monitor_)) return false;
    for (std::size_t i = 0; i < s_.z.size(); ++i) {
      if (!detail::bounded(s_.z[i], bound) || !all_finite(s_.y[i])) return false;
    }
    return true;
  }

  std::optional<double> lyapunov() const {
    if (!anchor_) return std::nullopt;
    if constexpr (Reflected) {
      return lyapunov_bsrfb(*lifted_b_, p_.c.beta(), gamma_, *anchor_, h_, metric_);
    } else {
      return lyapunov_bsfrb(*lifted_b_, p_.c.beta(), gamma_, *anchor_, h_, metric_);
    }
  }

  FinalState final_state() const {
    return {concat_blocks(s_.z), concat_blocks(s_.y), monitor_};
  }

 private:
  const MOperatorProblem& p_;
  MSplitState s_;
  double gamma_;
  Metric metric_;
  std::optional<SplitAnchor> anchor_;
  std::optional<ForwardOperator> lifted_b_;
  SplitHistory h_;
  Vector monitor_, z_old_, z_new_;
};

class MPairStepper {
 public:
  MPairStepper(const MOperatorProblem& p, MSfrdrState s, double gamma, double lambda,
               std::optional<PairAnchor> anchor)
      : p_(p),
        s_(std::move(s)),
        gamma_(gamma),
        lambda_(lambda),
        metric_(product_metric(p)),
        anchor_(std::move(anchor)) {
    if (anchor_) {
      lifted_b_.emplace(lifted_forward(p_.b, p_.m(), p_.dim));
      h_.x = {lifted(s_.x_prev), lifted(s_.x)};
      const Vector u = concat_blocks(s_.u);
      h_.u = {u, u};
    }
  }

  const Vector& monitor() const { return s_.x; }

  void advance() {
    const Vector x_old = s_.x;
    const Vector u_old = concat_blocks(s_.u);
    step_m_sfrdr(p_, s_, gamma_, lambda_);
    const Vector u_new = concat_blocks(s_.u);
    residual_ = detail::pair_residual(lifted(subtract(s_.x, x_old)), subtract(u_new, u_old),
                                      gamma_, lambda_, metric_);
    if (anchor_) h_.push(lifted(s_.x), u_new, 2);
  }

  double residual() const { return residual_; }

  bool healthy(double bound) const {
    if (!detail::bounded(s_.x, bound)) return false;
    for (const auto& u : s_.u) {
      if (!detail::bounded(u, bound)) return false;
    }
    return true;
  }

  std::optional<double> lyapunov() const {
    if (!anchor_) return std::nullopt;
    return lyapunov_sfrdr(*lifted_b_, gamma_, lambda_, *anchor_, h_, metric_);
  }

  FinalState final_state() const { return {s_.x, concat_blocks(s_.u), s_.x}; }

 private:
  Vector lifted(const Vector& x) const { return concat_blocks(lift(x, p_.m())); }

  const MOperatorProblem& p_;
  MSfrdrState s_;
  double gamma_, lambda_;
  Metric metric_;
  std::optional<PairAnchor> anchor_;
  std::optional<ForwardOperator> lifted_b_;
  PairHistory h_;
  double residual_ = 0.0;
};

template <class A>
std::optional<A> anchor_as(const std::optional<LyapunovAnchor>& anchor, Algorithm alg) {
  if (!anchor) return std::nullopt;
  if (const A* a = std::get_if<A>(&*anchor)) return *a;
  throw InvalidArgument(std::string("Lyapunov anchor has the wrong shape for ") + to_string(alg));
}

}  // namespace

RunTrace run_m(const MOperatorProblem& p, const SolverParams& params, const InitialState& init,
               const RunOptions& options) {
  p.validate();
  if (!is_multi(params.algorithm)) {
    throw InvalidArgument(std::string(to_string(params.algorithm)) +
                          " is a four-operator method (use run)");
  }
  detail::validate_options(options);
  std::vector<std::string> warnings;
  if (auto w = check_stepsize(params.algorithm, params.gamma, params.lambda, p.c.beta(),
                              p.b.lipschitz(), params.mode)) {
    warnings.push_back(*w);
  }
  switch (params.algorithm) {
    case Algorithm::m_bsfrb: {
      MSplitStepper<false> st(p, make_m_split_state(p, params.algorithm, init.z0, init.y0,
                                                    init.y_prev),
                              params.gamma, anchor_as<SplitAnchor>(options.anchor, params.algorithm));
      return detail::drive(st, options, std::move(warnings));
    }
    case Algorithm::m_bsrfb: {
      MSplitStepper<true> st(p, make_m_split_state(p, params.algorithm, init.z0, init.y0,
                                                   init.y_prev),
                             params.gamma, anchor_as<SplitAnchor>(options.anchor, params.algorithm));
      return detail::drive(st, options, std::move(warnings));
    }
    case Algorithm::m_sfrdr: {
      MPairStepper st(p, make_m_sfrdr_state(p, init.x0, init.u0, init.x_prev), params.gamma,
                      *params.lambda, anchor_as<PairAnchor>(options.anchor, params.algorithm));
      return detail::drive(st, options, std::move(warnings));
    }
    default: break;
  }
  throw InvalidArgument("run_m: unsupported algorithm");
}

LyapunovAnchor presolve_anchor_m(const MOperatorProblem& p, const SolverParams& params,
                                 double tolerance, std::size_t max_iter) {
  RunOptions opt;
  opt.stop = StoppingRule::fixed_point(tolerance);
  opt.max_iter = max_iter;
  opt.keep_iterates = false;
  const RunTrace t = run_m(p, params, InitialState{}, opt);
  if (t.termination != Termination::converged) {
    throw SolverError(t.iterations, "anchor pre-solve did not reach the requested tolerance");
  }
  if (base_algorithm(params.algorithm) == Algorithm::sfrdr) {
    return PairAnchor{concat_blocks(lift(t.final_state.first, p.m())), t.final_state.second};
  }
  const Vector& z = t.final_state.first;
  return SplitAnchor{z, concat_blocks(lift(weighted_average_flat(p.w, z, p.dim), p.m()))};
}

}  // namespace opsplit
