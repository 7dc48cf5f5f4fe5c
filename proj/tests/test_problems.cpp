#include <random>

#include "doctest.h"
#include "opsplit/problems.hpp"
#include "reference.hpp"

using namespace opsplit;

namespace {

SyntheticSpec spec_of(std::size_t dim, std::vector<ConvexSet> sets, Vector f) {
  SyntheticSpec s;
  s.dim = dim;
  s.sets = std::move(sets);
  s.f = std::move(f);
  return s;
}

}  // namespace

TEST_CASE("oracle on hand-solvable instances") {
  SUBCASE("interval, x - 3") {
    const auto s = spec_of(1, {ConvexSet::box({-1}, {1}), ConvexSet::whole_space(1)}, {3});
    const OracleSolution o = oracle_solve(s);
    CHECK(o.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    // 3 - x = 2 is the normal-cone certificate at the right end point
    CHECK(o.certificates[0][0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(verify_solution(build_synthetic(s), o.x, 1e-8, o.certificates));
  }
  SUBCASE("unconstrained") {
    const auto s =
        spec_of(3, {ConvexSet::whole_space(3), ConvexSet::whole_space(3)}, {1.5, -2, 0.25});
    CHECK(ref::max_abs_diff(oracle_solve(s).x, s.f) < 1e-12);
  }
  SUBCASE("unit ball, f = (3, 0)") {
    const auto s = spec_of(2, {ConvexSet::ball({0, 0}, 1), ConvexSet::whole_space(2)}, {3, 0});
    const OracleSolution o = oracle_solve(s);
    CHECK(ref::max_abs_diff(o.x, {1, 0}) < 1e-10);
    CHECK(verify_solution(build_synthetic(s), o.x, 1e-8));
    CHECK_FALSE(verify_solution(build_synthetic(s), {1.1, 0.1}, 1e-8));
  }
}

TEST_CASE("oracle certificates close the inclusion on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + trial % 8;
    const SyntheticSpec s = random_synthetic(dim, 2 + trial % 3, rng);
    const OracleSolution o = oracle_solve(s);
    CAPTURE(trial);
    for (const auto& set : s.sets) CHECK(set.contains(o.x, 1e-9));
    const MOperatorProblem p = build_synthetic_m(s);
    CHECK(verify_solution(p, o.x, 1e-8, o.certificates));
    Vector moved = o.x;
    for (auto& v : moved) v += 0.1;
    CHECK_FALSE(verify_solution(p, moved, 1e-8, o.certificates));
  }
}

TEST_CASE("random instances are well formed") {
  std::mt19937_64 rng(1);
  int with_skew = 0;
  for (int i = 0; i < 40; ++i) {
    const SyntheticSpec s = random_synthetic(4, 3, rng);
    CHECK_NOTHROW(s.validate());
    CHECK(s.sets.size() == 3);
    if (!s.skew.empty()) {
      ++with_skew;
      const ForwardOperator b = skew_matrix_operator(s.skew, 4);
      CHECK(b.lipschitz() <= 1.0 + 1e-12);
    }
  }
  CHECK(with_skew > 10);
  CHECK(with_skew < 40);
  CHECK_THROWS_AS(random_synthetic(0, 2, rng), InvalidArgument);
}

TEST_CASE("synthetic builders") {
  std::mt19937_64 rng(3);
  SyntheticSpec s = random_synthetic(3, 2, rng);
  const FourOperatorProblem p = build_synthetic(s);
  CHECK(p.dim == 3);
  CHECK(p.c.beta() == 1.0);
  s.sets.push_back(ConvexSet::ball({0, 0, 0}, 5));
  CHECK_THROWS_AS(build_synthetic(s), InvalidArgument);
  CHECK(build_synthetic_m(s).m() == 3);
  s.f = {1, 2};
  CHECK_THROWS_AS(build_synthetic_m(s), InvalidArgument);
}

TEST_CASE("zero problem accepts any point") {
  const FourOperatorProblem p{ResolventOperator::zero(2), ResolventOperator::zero(2),
                              ForwardOperator::zero(2), CocoerciveOperator::zero(2), 2};
  CHECK(verify_solution(p, {3, -7}, 1e-12));
  CHECK_THROWS_AS(verify_solution(p, {3, -7}, 0.0), InvalidParameter);
  CHECK_FALSE(verify_solution(p, {NAN, 0}, 1.0));
}

TEST_CASE("Minkowski benchmark") {
  const std::vector<ConvexSet> sets = standard_minkowski_sets();
  REQUIRE(sets.size() == 3);
  const MOperatorProblem p = build_minkowski({sets, {6, -4}});
  CHECK(p.dim == 4);
  CHECK(p.b.lipschitz() == 1.0);
  CHECK(p.c.beta() == 1.0);
  std::mt19937_64 rng(8);
  CHECK(check_monotone_lipschitz(p.b, 4, 500, rng).passed(1e-12));
  CHECK(check_cocoercive(p.c, 4, 500, rng).passed(1e-12));
  for (const auto& a : p.a) CHECK(check_firmly_nonexpansive(a, 0.3, 4, 500, rng).passed(1e-10));

  SUBCASE("projection of a single ball is the plain projection") {
    const MOperatorProblem q = build_minkowski({{ConvexSet::ball({0, 0}, 1)}, {3, 0}});
    RunOptions opt;
    opt.stop = StoppingRule::known_solution({1, 0}, 1e-8);
    opt.max_iter = 5000;
    const RunTrace t = run_m(q, {Algorithm::m_bsfrb, 0.09}, {}, opt);
    CHECK(t.termination == Termination::converged);
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(build_minkowski({{}, {1, 1}}), InvalidArgument);
    CHECK_THROWS_AS(build_minkowski({{ConvexSet::whole_space(2)}, {1, 1}}), InvalidArgument);
    CHECK_THROWS_AS(build_minkowski({{ConvexSet::ball({0, 0, 0}, 1)}, {1, 1}}), InvalidArgument);
  }
  CHECK_THROWS_AS(minkowski_decomposition({{1, 2, 3}}), InvalidArgument);
}
