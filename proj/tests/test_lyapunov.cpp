#include <cmath>
#include <random>

#include "doctest.h"
#include "opsplit/lifting.hpp"
#include "opsplit/problems.hpp"
#include "opsplit/splitting.hpp"
#include "reference.hpp"

using namespace opsplit;

namespace {

struct Fixture {
  SyntheticSpec spec;
  FourOperatorProblem p;
};

Fixture make(std::uint64_t seed, std::size_t dim, bool dense = false) {
  std::mt19937_64 rng(seed);
  SyntheticSpec s = dense ? ref::dense_spec(dim, rng) : random_synthetic(dim, 2, rng);
  return {s, build_synthetic(s)};
}

SolverParams params_for(Algorithm alg, const FourOperatorProblem& p, double frac, double lam) {
  SolverParams sp{alg, 0.0, needs_lambda(alg) ? std::optional<double>(lam) : std::nullopt};
  sp.gamma = frac * max_gamma(alg, p.c.beta(), p.b.lipschitz(), sp.lambda);
  return sp;
}

// Largest increase V_{n+1} - V_n over n >= warmup.
double worst_increase(const RunTrace& t, std::size_t warmup) {
  double worst = -INFINITY;
  for (std::size_t n = warmup + 1; n < t.records.size(); ++n) {
    worst = std::max(worst, *t.records[n].lyapunov - *t.records[n - 1].lyapunov);
  }
  return worst;
}

}  // namespace

TEST_CASE("summability constants") {
  for (double beta : {0.5, 1.0, 4.0}) {
    for (double L : {0.0, 0.3, 1.0}) {
      CAPTURE(beta);
      CAPTURE(L);
      const double lam = 1.5;
      const double t = beta * L;
      // forward-reflected split: vanishes at the bound, and identically when B = 0
      const double gb = max_gamma(Algorithm::bsfrb, beta, L);
      const LyapunovConstants kb = lyapunov_constants(Algorithm::bsfrb, beta, L, 0.9 * gb);
      CHECK(kb.eps_prime == doctest::Approx(1 - 1 / (1 + 4 * t) - 8 * 0.9 * gb * L));
      CHECK(kb.eps_prime >= 0.0);
      if (L > 0) CHECK(kb.eps_prime > 0.0);
      CHECK(std::abs(lyapunov_constants(Algorithm::bsfrb, beta, L, gb).eps_prime) < 1e-12);

      // pair method: positive inside, zero at the bound
      const double gs = max_gamma(Algorithm::sfrdr, beta, L, lam);
      CHECK(lyapunov_constants(Algorithm::sfrdr, beta, L, 0.9 * gs, lam).eps_prime > 0.0);
      CHECK(std::abs(lyapunov_constants(Algorithm::sfrdr, beta, L, gs, lam).eps_prime) < 1e-12);

      // reflected split: the closed form is reproduced as stated; it is not
      // positive near the bound, so no sign is asserted
      const double gr = 0.9 * max_gamma(Algorithm::bsrfb, beta, L);
      const LyapunovConstants kr = lyapunov_constants(Algorithm::bsrfb, beta, L, gr);
      const double a = bsrfb_a(beta, L);
      const double eps = 1 / (5 + (10 + 6 / a) * t);
      CHECK(kr.eps == doctest::Approx(eps));
      CHECK(kr.eps_prime == doctest::Approx(1 - 4 * eps - 8 * gr / beta - (20 + 12 / a) * gr * L));
    }
  }
  CHECK(lyapunov_warmup(Algorithm::sfrdr) == 0);
  CHECK(lyapunov_warmup(Algorithm::bsfrb) <= lyapunov_warmup(Algorithm::bsrfb));
}

TEST_CASE("Lyapunov values are nonincreasing along runs") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Fixture f = make(seed, 2 + seed % 5);
    for (auto alg : {Algorithm::bsfrb, Algorithm::bsrfb, Algorithm::sfrdr}) {
      CAPTURE(seed);
      CAPTURE(to_string(alg));
      const SolverParams sp = params_for(alg, f.p, 0.9, 2.0);
      RunOptions opt;
      opt.stop = StoppingRule::fixed_point(1e-11);
      opt.max_iter = 3000;
      opt.anchor = presolve_anchor(f.p, sp, 1e-12, 400000);
      std::mt19937_64 rng(seed * 7);
      InitialState init;
      init.z0 = init.x0 = ref::random_vector(f.p.dim, rng, 3.0);
      init.u0 = ref::random_vector(f.p.dim, rng);
      const RunTrace t = run(f.p, sp, init, opt);
      REQUIRE(t.records.back().lyapunov.has_value());
      CHECK(worst_increase(t, lyapunov_warmup(alg)) <= 1e-9);
      CHECK(*t.records.back().lyapunov >= -1e-9);
    }
  }
}

TEST_CASE("consistent start makes the forward-reflected sequence monotone from the first index") {
  const Fixture f = make(17, 4);
  const SolverParams sp = params_for(Algorithm::bsfrb, f.p, 0.9, 0);
  const auto anchor = std::get<SplitAnchor>(presolve_anchor(f.p, sp, 1e-12, 400000));
  std::mt19937_64 rng(3);
  BsfrbState s = consistent_bsfrb_start(f.p, ref::random_vector(f.p.dim, rng, 4.0), sp.gamma);
  SplitHistory h;
  for (int i = 0; i < 3; ++i) h.push(s.z, s.y_prev, 4);
  h.push(s.z, s.y, 4);
  double prev = lyapunov_bsfrb(f.p.b, f.p.c.beta(), sp.gamma, anchor, h);
  for (int n = 0; n < 500; ++n) {
    step_bsfrb(f.p, s, sp.gamma);
    h.push(s.z, s.y, 4);
    const double v = lyapunov_bsfrb(f.p.b, f.p.c.beta(), sp.gamma, anchor, h);
    REQUIRE(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("summed decrease is bounded by the initial value") {
  const Fixture f = make(23, 5, true);
  RunOptions opt;
  opt.stop = StoppingRule::fixed_point(1e-12);
  opt.max_iter = 20000;
  InitialState init;
  init.z0 = init.x0 = Vector(f.p.dim, 5.0);
  init.u0 = Vector(f.p.dim, -1.0);

  SUBCASE("forward-reflected split") {
    // eps' sum_n |z_{n+1} - z_n|^2 <= V_warmup
    const SolverParams sp = params_for(Algorithm::bsfrb, f.p, 0.8, 0);
    opt.anchor = presolve_anchor(f.p, sp, 1e-12, 400000);
    const RunTrace t = run(f.p, sp, init, opt);
    const double ep =
        lyapunov_constants(Algorithm::bsfrb, f.p.c.beta(), f.p.b.lipschitz(), sp.gamma).eps_prime;
    REQUIRE(ep > 0.0);
    const std::size_t w = lyapunov_warmup(Algorithm::bsfrb);
    double sum = 0.0;
    for (std::size_t n = w + 1; n < t.records.size(); ++n) {
      sum += ep * t.records[n].residual * t.records[n].residual;
    }
    CHECK(sum <= *t.records[w].lyapunov + 1e-9);
    CHECK(t.final_residual() <= 1e-12);
  }
  SUBCASE("pair method") {
    // eps' sum_n (|D_{n+1}|_K^2 + |D_n|_K^2) <= V_0
    const SolverParams sp = params_for(Algorithm::sfrdr, f.p, 0.8, 1.0);
    opt.anchor = presolve_anchor(f.p, sp, 1e-12, 400000);
    const RunTrace t = run(f.p, sp, init, opt);
    const double ep = lyapunov_constants(Algorithm::sfrdr, f.p.c.beta(), f.p.b.lipschitz(),
                                         sp.gamma, sp.lambda)
                          .eps_prime;
    double sum = 0.0;
    for (std::size_t n = 1; n < t.records.size(); ++n) {
      const double r1 = t.records[n].residual, r0 = t.records[n - 1].residual;
      sum += ep * (r1 * r1 + r0 * r0);
    }
    CHECK(sum <= *t.records[0].lyapunov + 1e-9);
    CHECK(t.final_residual() <= 1e-12);
  }
}

TEST_CASE("product-space runs carry a weighted Lyapunov sequence") {
  std::mt19937_64 rng(29);
  const SyntheticSpec spec = random_synthetic(3, 3, rng);
  const MOperatorProblem p = build_synthetic_m(spec, WeightVector({0.2, 0.3, 0.5}));
  for (auto alg : {Algorithm::m_bsfrb, Algorithm::m_bsrfb, Algorithm::m_sfrdr}) {
    CAPTURE(to_string(alg));
    SolverParams sp{alg, 0.0, needs_lambda(alg) ? std::optional<double>(1.0) : std::nullopt};
    sp.gamma = 0.9 * max_gamma(alg, p.c.beta(), p.b.lipschitz(), sp.lambda);
    RunOptions opt;
    opt.stop = StoppingRule::fixed_point(1e-11);
    opt.max_iter = 3000;
    opt.anchor = presolve_anchor_m(p, sp, 1e-12, 400000);
    InitialState init;
    init.z0 = init.x0 = Vector(p.dim, -2.0);
    const RunTrace t = run_m(p, sp, init, opt);
    CHECK(worst_increase(t, lyapunov_warmup(base_algorithm(alg))) <= 1e-9);
  }
}

TEST_CASE("anchor of the wrong kind is rejected") {
  const Fixture f = make(31, 3);
  RunOptions opt;
  opt.anchor = PairAnchor{Vector(3, 0.0), Vector(3, 0.0)};
  CHECK_THROWS_AS(run(f.p, params_for(Algorithm::bsfrb, f.p, 0.5, 0), {}, opt), InvalidArgument);
}
