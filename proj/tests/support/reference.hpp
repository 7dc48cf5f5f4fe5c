// Hand-written reference iterations and fixtures shared by the test binaries.
// The loops below use raw index arithmetic on purpose: they must not share
// code with the library, only the rounding order of each expression.
#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <random>
#include <vector>

#include "opsplit/operators.hpp"
#include "opsplit/problems.hpp"
#include "opsplit/splitting.hpp"

namespace ref {

using opsplit::Vector;

struct Ops {
  const opsplit::ResolventOperator* a1 = nullptr;  // null: zero operator
  const opsplit::ResolventOperator* a2 = nullptr;
  const opsplit::ForwardOperator* b = nullptr;
  const opsplit::CocoerciveOperator* c = nullptr;  // null: C = 0
};

inline Vector J(const opsplit::ResolventOperator* a, double g, const Vector& v) {
  return a ? a->resolve(g, v) : v;
}

// Forward-reflected-backward: w+ = J(w - g(2Bw - Bw-) - g Cw).
inline Vector frb(const Ops& o, Vector w, double g, std::size_t iters) {
  Vector bw_prev = o.b->eval(w);
  for (std::size_t n = 0; n < iters; ++n) {
    const Vector bw = o.b->eval(w);
    Vector t(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) t[k] = w[k] - g * (2.0 * bw[k] - bw_prev[k]);
    if (o.c) {
      const Vector cw = o.c->eval(w);
      for (std::size_t k = 0; k < w.size(); ++k) t[k] = t[k] - g * cw[k];
    }
    bw_prev = bw;
    w = J(o.a2, g, t);
  }
  return w;
}

// Reflected forward-backward: w+ = J(w - g B(2w - w-) - g Cw).
inline Vector rfb(const Ops& o, Vector w, double g, std::size_t iters) {
  Vector w_prev = w;
  for (std::size_t n = 0; n < iters; ++n) {
    Vector r(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) r[k] = 2.0 * w[k] - w_prev[k];
    const Vector br = o.b->eval(r);
    Vector t(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) t[k] = w[k] - g * br[k];
    if (o.c) {
      const Vector cw = o.c->eval(w);
      for (std::size_t k = 0; k < w.size(); ++k) t[k] = t[k] - g * cw[k];
    }
    w_prev = w;
    w = J(o.a2, g, t);
  }
  return w;
}

// Split schemes without the cocoercive term; returns the last z.
inline Vector split_no_c(const Ops& o, Vector z, double g, std::size_t iters, bool reflected) {
  const std::size_t d = z.size();
  Vector y(d, 0.0), y_prev(d, 0.0);
  for (std::size_t n = 0; n < iters; ++n) {
    const Vector x = J(o.a1, g, z);
    Vector t(d);
    if (reflected) {
      Vector r(d);
      for (std::size_t k = 0; k < d; ++k) r[k] = 2.0 * y[k] - y_prev[k];
      const Vector br = o.b->eval(r);
      for (std::size_t k = 0; k < d; ++k) t[k] = (2.0 * x[k] - z[k]) - g * br[k];
    } else {
      const Vector by = o.b->eval(y), byp = o.b->eval(y_prev);
      for (std::size_t k = 0; k < d; ++k) t[k] = (2.0 * x[k] - z[k]) - g * (2.0 * by[k] - byp[k]);
    }
    y_prev = y;
    y = J(o.a2, g, t);
    for (std::size_t k = 0; k < d; ++k) z[k] = y[k] + (z[k] - x[k]);
  }
  return z;
}

struct PairResult {
  Vector x, u;
};

// Douglas-Rachford type scheme without the cocoercive term.
inline PairResult pair_no_c(const Ops& o, Vector x, Vector u, double g, double l,
                            std::size_t iters) {
  const std::size_t d = x.size();
  Vector bx_prev = o.b->eval(x);
  const double inv = 1.0 / l;
  for (std::size_t n = 0; n < iters; ++n) {
    const Vector bx = o.b->eval(x);
    Vector t(d);
    for (std::size_t k = 0; k < d; ++k) t[k] = (x[k] - g * u[k]) - g * (2.0 * bx[k] - bx_prev[k]);
    bx_prev = bx;
    const Vector xn = J(o.a2, g, t);
    Vector w(d), v(d);
    for (std::size_t k = 0; k < d; ++k) {
      w[k] = 2.0 * xn[k] - x[k];
      v[k] = w[k] + l * u[k];
    }
    const Vector y = J(o.a1, l, v);
    for (std::size_t k = 0; k < d; ++k) u[k] = u[k] + inv * (w[k] - y[k]);
    x = xn;
  }
  return {x, u};
}

inline bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] == b[k])) return false;
  }
  return true;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline Vector random_vector(std::size_t d, std::mt19937_64& rng, double s = 1.0) {
  std::normal_distribution<double> n(0.0, s);
  Vector v(d);
  for (auto& x : v) x = n(rng);
  return v;
}

// Two-set synthetic spec with a dense skew matrix (never zero).
inline opsplit::SyntheticSpec dense_spec(std::size_t dim, std::mt19937_64& rng) {
  opsplit::SyntheticSpec s = opsplit::random_synthetic(dim, 2, rng);
  s.skew.assign(dim * dim, 0.0);
  std::normal_distribution<double> n(0.0, 0.3);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      s.skew[i * dim + j] = n(rng);
      s.skew[j * dim + i] = -s.skew[i * dim + j];
    }
  }
  return s;
}

// Counts evaluations of wrapped operators.
struct Counters {
  std::shared_ptr<std::size_t> a1 = std::make_shared<std::size_t>(0);
  std::shared_ptr<std::size_t> a2 = std::make_shared<std::size_t>(0);
  std::shared_ptr<std::size_t> b = std::make_shared<std::size_t>(0);
  std::shared_ptr<std::size_t> c = std::make_shared<std::size_t>(0);
};

inline opsplit::FourOperatorProblem counted(const opsplit::FourOperatorProblem& p,
                                            const Counters& k) {
  using namespace opsplit;
  auto wrap_r = [](ResolventOperator a, std::shared_ptr<std::size_t> cnt) {
    return ResolventOperator(
        [a, cnt](double g, std::span<const double> v) {
          ++*cnt;
          return a.resolve(g, v);
        },
        a.name(), a.dimension());
  };
  ForwardOperator b(
      [b0 = p.b, cnt = k.b](std::span<const double> v) {
        ++*cnt;
        return b0.eval(v);
      },
      p.b.lipschitz() > 0 ? p.b.lipschitz() : 1.0, p.b.name(), p.b.dimension());
  CocoerciveOperator c(
      [c0 = p.c, cnt = k.c](std::span<const double> v) {
        ++*cnt;
        return c0.eval(v);
      },
      std::isfinite(p.c.beta()) ? p.c.beta() : 1.0, p.c.name(), p.c.dimension());
  return {wrap_r(p.a1, k.a1), wrap_r(p.a2, k.a2), b, c, p.dim};
}

}  // namespace ref
