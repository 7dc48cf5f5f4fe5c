#include <random>

#include "doctest.h"
#include "opsplit/lifting.hpp"
#include "opsplit/problems.hpp"
#include "reference.hpp"

using namespace opsplit;

namespace {

MOperatorProblem minkowski(const Vector& f, std::optional<WeightVector> w = std::nullopt) {
  return build_minkowski({standard_minkowski_sets(), f}, std::move(w));
}

}  // namespace

TEST_CASE("lift and diagonal projection") {
  const LiftedPoint l = lift({1, 2}, 3);
  REQUIRE(l.size() == 3);
  CHECK(l[2] == Vector{1, 2});
  const WeightVector w({0.5, 0.25, 0.25});
  const LiftedPoint p = project_diagonal(w, {{4, 0}, {0, 4}, {0, 0}});
  for (const auto& b : p) CHECK(b == Vector{2, 1});
  CHECK_THROWS_AS(project_diagonal(w, {{1, 2}}), InvalidArgument);
}

TEST_CASE("diagonal normal cone resolvent is the weighted average") {
  const WeightVector w({0.2, 0.8});
  const ResolventOperator nv = diagonal_normal_cone(w, 2);
  const Vector out = nv.resolve(3.0, Vector{1, 1, 6, -4});
  CHECK(out[0] == doctest::Approx(5.0));
  CHECK(out[1] == doctest::Approx(-3.0));
  CHECK(out[2] == out[0]);
  CHECK(out[3] == out[1]);
}

TEST_CASE("lifted resolvent rescales by the weights") {
  // A_i = Id: J_{g/w A}(v) = v / (1 + g/w)
  const ResolventOperator id([](double g, std::span<const double> v) {
    Vector o(v.begin(), v.end());
    for (auto& x : o) x /= 1 + g;
    return o;
  }, "id");
  const WeightVector w({0.5, 0.5});
  const LiftedPoint out = lifted_resolvent({id, id}, w, 1.0, {{3.0}, {6.0}});
  CHECK(out[0][0] == doctest::Approx(1.0));
  CHECK(out[1][0] == doctest::Approx(2.0));
}

TEST_CASE("problem validation") {
  MOperatorProblem p = minkowski({6, -4});
  CHECK(p.m() == 3);
  CHECK(p.dim == 4);
  CHECK_NOTHROW(p.validate());
  p.w = WeightVector({0.5, 0.5});
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("initial vectors may be empty, base-sized or lifted") {
  const MOperatorProblem p = minkowski({1, -4});
  const MSplitState a = make_m_split_state(p, Algorithm::m_bsfrb);
  CHECK(a.z.size() == 3);
  CHECK(a.z[1] == Vector(4, 0.0));
  const MSplitState b = make_m_split_state(p, Algorithm::m_bsfrb, Vector{1, 2, 3, 4});
  CHECK(b.z[2] == Vector{1, 2, 3, 4});
  Vector flat(12);
  for (std::size_t k = 0; k < 12; ++k) flat[k] = static_cast<double>(k);
  const MSplitState c = make_m_split_state(p, Algorithm::m_bsrfb, flat);
  CHECK(c.z[1] == Vector{4, 5, 6, 7});
  CHECK_THROWS_AS(make_m_split_state(p, Algorithm::m_bsfrb, Vector(5, 0.0)), InvalidArgument);
  const MSfrdrState s = make_m_sfrdr_state(p, {}, flat);
  CHECK(s.u[2] == Vector{8, 9, 10, 11});
  CHECK(s.x == Vector(4, 0.0));
}

TEST_CASE("product-space steps equal the two-set methods on the lifted problem, bitwise") {
  const WeightVector w({0.2, 0.3, 0.5});
  for (const auto& f : {Vector{6, -4}, Vector{1, -4}, Vector{2, 7}}) {
    for (const auto& weights : {std::optional<WeightVector>{}, std::optional<WeightVector>{w}}) {
      const MOperatorProblem p = minkowski(f, weights);
      std::mt19937_64 rng(5);
      const Vector z0 = ref::random_vector(p.dim * p.m(), rng, 2.0);
      const Vector y0 = ref::random_vector(p.dim * p.m(), rng, 2.0);

      SUBCASE("forward-reflected") {
        const FourOperatorProblem lp = lifted_problem(p, Algorithm::m_bsfrb);
        MSplitState s = make_m_split_state(p, Algorithm::m_bsfrb, z0, y0);
        BsfrbState l = to_lifted_bsfrb(p, s);
        for (int n = 0; n < 100; ++n) {
          const Vector x = step_m_bsfrb(p, s, 0.06);
          const Vector lx = step_bsfrb(lp, l, 0.06);
          for (const auto& block : split_blocks(lx, p.dim)) REQUIRE(ref::bitwise_equal(block, x));
          REQUIRE(ref::bitwise_equal(concat_blocks(s.z), l.z));
          REQUIRE(ref::bitwise_equal(concat_blocks(s.y), l.y));
        }
      }
      SUBCASE("reflected") {
        const FourOperatorProblem lp = lifted_problem(p, Algorithm::m_bsrfb);
        MSplitState s = make_m_split_state(p, Algorithm::m_bsrfb, z0, y0);
        BsrfbState l = to_lifted_bsrfb(s);
        for (int n = 0; n < 100; ++n) {
          step_m_bsrfb(p, s, 0.05);
          step_bsrfb(lp, l, 0.05);
          REQUIRE(ref::bitwise_equal(concat_blocks(s.z), l.z));
          REQUIRE(ref::bitwise_equal(concat_blocks(s.y), l.y));
        }
      }
      SUBCASE("Douglas-Rachford type") {
        const FourOperatorProblem lp = lifted_problem(p, Algorithm::m_sfrdr);
        MSfrdrState s = make_m_sfrdr_state(p, Vector(z0.begin(), z0.begin() + 4), y0);
        SfrdrState l = to_lifted_sfrdr(p, s);
        for (const double lam : {0.5, 5.0}) {
          for (int n = 0; n < 50; ++n) {
            const std::vector<Vector> y = step_m_sfrdr(p, s, 0.15, lam);
            const Vector ly = step_sfrdr(lp, l, 0.15, lam);
            REQUIRE(ref::bitwise_equal(concat_blocks(y), ly));
            REQUIRE(ref::bitwise_equal(concat_blocks(lift(s.x, p.m())), l.x));
            REQUIRE(ref::bitwise_equal(concat_blocks(s.u), l.u));
          }
        }
      }
    }
  }
}

TEST_CASE("a single operator reduces the product space to the base method") {
  std::mt19937_64 rng(9);
  SyntheticSpec spec = ref::dense_spec(4, rng);
  spec.sets.erase(spec.sets.begin() + 1, spec.sets.end());
  const MOperatorProblem mp = build_synthetic_m(spec);
  FourOperatorProblem p{mp.a[0], ResolventOperator::zero(4), mp.b, mp.c, 4};
  const Vector z0 = ref::random_vector(4, rng, 2.0);

  MSplitState s = make_m_split_state(mp, Algorithm::m_bsfrb, z0);
  BsfrbState d = make_bsfrb_state(p, z0);
  MSplitState r = make_m_split_state(mp, Algorithm::m_bsrfb, z0);
  BsrfbState dr = make_bsrfb_state(p, z0);
  const double g = 0.9 * max_gamma(Algorithm::bsrfb, mp.c.beta(), mp.b.lipschitz());
  for (int n = 0; n < 100; ++n) {
    step_m_bsfrb(mp, s, g);
    step_bsfrb({ResolventOperator::zero(4), mp.a[0], mp.b, mp.c, 4}, d, g);
    step_m_bsrfb(mp, r, g);
    step_bsrfb({ResolventOperator::zero(4), mp.a[0], mp.b, mp.c, 4}, dr, g);
  }
  CHECK(ref::bitwise_equal(s.z[0], d.z));
  CHECK(ref::bitwise_equal(r.z[0], dr.z));

  // The pair method has its maximal operator in the A1 slot and A2 = 0.
  MSfrdrState q = make_m_sfrdr_state(mp, z0);
  p.a2 = ResolventOperator::zero(4);
  SfrdrState dq = make_sfrdr_state(p, z0);
  for (int n = 0; n < 100; ++n) {
    step_m_sfrdr(mp, q, g, 1.0);
    step_sfrdr(p, dq, g, 1.0);
  }
  CHECK(ref::bitwise_equal(q.x, dq.x));
  CHECK(ref::bitwise_equal(q.u[0], dq.u));
}

TEST_CASE("implied subgradients sum to -(Bx + Cx) at convergence") {
  for (auto alg : {Algorithm::m_bsfrb, Algorithm::m_bsrfb, Algorithm::m_sfrdr}) {
    CAPTURE(to_string(alg));
    const MOperatorProblem p = minkowski({6, -4});
    SolverParams sp{alg, 0.05, needs_lambda(alg) ? std::optional<double>(0.5) : std::nullopt};
    RunOptions opt;
    opt.stop = StoppingRule::fixed_point(1e-13);
    opt.max_iter = 100000;
    const RunTrace t = run_m(p, sp, {}, opt);
    REQUIRE(t.termination == Termination::converged);
    std::vector<Vector> a;
    if (alg == Algorithm::m_sfrdr) {
      const MSfrdrState s = make_m_sfrdr_state(p, t.final_state.first, t.final_state.second);
      a = implied_subgradients(p, s, sp.gamma, *sp.lambda);
    } else {
      const MSplitState s = make_m_split_state(p, alg, t.final_state.first, t.final_state.second);
      a = implied_subgradients(p, alg, s, sp.gamma);
    }
    const Vector& x = t.solution();
    Vector total = add(p.b.eval(x), p.c.eval(x));
    for (const auto& ai : a) total = add(total, ai);
    CHECK(norm(total) < 1e-8);
    CHECK(verify_solution(p, x, 1e-8, a));

    // y-halves are points of the summands adding up to the projection
    const std::vector<Vector> parts = minkowski_decomposition(a);
    const std::vector<ConvexSet> sets = standard_minkowski_sets();
    Vector sum(2, 0.0);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      CHECK(sets[i].contains(parts[i], 1e-7));
      sum = add(sum, parts[i]);
    }
    CHECK(distance(sum, Vector{2.8, -1.6}) < 1e-7);
  }
}

TEST_CASE("product-space runs") {
  const MOperatorProblem p = minkowski({2, 7});
  RunOptions opt;
  opt.stop = StoppingRule::known_solution({2, 2}, 1e-6);
  opt.max_iter = 5000;
  const RunTrace t = run_m(p, {Algorithm::m_bsfrb, 0.08}, {}, opt);
  CHECK(t.termination == Termination::converged);
  CHECK(t.solution().size() == 4);
  CHECK(t.final_state.first.size() == 12);
  CHECK_THROWS_AS(run_m(p, {Algorithm::bsfrb, 0.08}, {}, opt), InvalidArgument);
  CHECK_THROWS_AS(run_m(p, {Algorithm::m_bsfrb, 0.1}, {}, opt), InvalidParameter);
  const RunTrace edge = run_m(p, {Algorithm::m_bsfrb, 0.1, {}, StepsizeMode::permissive}, {}, opt);
  CHECK(edge.warnings.size() == 1);
}

TEST_CASE("identical operators with uniform weights keep the blocks identical") {
  const ConvexSet ball = ConvexSet::ball({0, 0}, 1);
  const MOperatorProblem p = build_minkowski({{ball, ball, ball, ball}, {3, 1}});
  MSplitState s = make_m_split_state(p, Algorithm::m_bsfrb, Vector{1, -1, 0.5, 2});
  MSfrdrState q = make_m_sfrdr_state(p, Vector{1, -1, 0.5, 2}, Vector{0.3, 0.1, -1, 0});
  for (int n = 0; n < 200; ++n) {
    step_m_bsfrb(p, s, 0.07);
    step_m_sfrdr(p, q, 0.1, 2.0);
    for (std::size_t i = 1; i < p.m(); ++i) {
      REQUIRE(ref::bitwise_equal(s.z[i], s.z[0]));
      REQUIRE(ref::bitwise_equal(q.u[i], q.u[0]));
    }
  }
}
