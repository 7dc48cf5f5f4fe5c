#include <cmath>

#include "doctest.h"
#include "opsplit/space.hpp"

using namespace opsplit;

TEST_CASE("vector arithmetic") {
  const Vector a{1, 2, 2}, b{0, -1, 3};
  CHECK(dot(a, b) == 4.0);
  CHECK(norm(a) == 3.0);
  CHECK(norm_sq(b) == 10.0);
  CHECK(distance(a, a) == 0.0);
  CHECK(add(a, b) == Vector{1, 1, 5});
  CHECK(subtract(a, b) == Vector{1, 3, -1});
  CHECK(scale(-2, a) == Vector{-2, -4, -4});
  CHECK_THROWS_AS(dot(a, Vector{1, 2}), InvalidArgument);
  CHECK(all_finite(a));
  CHECK_FALSE(all_finite(Vector{1, INFINITY}));
  CHECK_FALSE(all_finite(Vector{NAN}));
}

TEST_CASE("weights must be positive, at most one, and sum to one") {
  CHECK_NOTHROW(WeightVector({0.2, 0.3, 0.5}));
  CHECK_NOTHROW(WeightVector({1.0}));
  CHECK_THROWS_AS(WeightVector({}), InvalidParameter);
  CHECK_THROWS_AS(WeightVector({0.5, 0.6}), InvalidParameter);
  CHECK_THROWS_AS(WeightVector({0.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(WeightVector({-0.5, 1.5}), InvalidParameter);
  CHECK_THROWS_AS(WeightVector({NAN, 1.0}), InvalidParameter);
  // within the summation tolerance
  CHECK_NOTHROW(WeightVector({0.1, 0.2, 0.7 + 5e-13}));
  const WeightVector u = WeightVector::uniform(4);
  CHECK(u.size() == 4);
  CHECK(u[2] == 0.25);
  CHECK_THROWS(WeightVector::uniform(0));
}

TEST_CASE("weighted inner product and average") {
  const WeightVector w({0.25, 0.75});
  const std::vector<Vector> x{{1, 0}, {0, 2}}, y{{4, 1}, {1, 1}};
  CHECK(weighted_inner(w, x, y) == doctest::Approx(0.25 * 4 + 0.75 * 2));
  const Vector flat_x = concat_blocks(x), flat_y = concat_blocks(y);
  CHECK(flat_x == Vector{1, 0, 0, 2});
  CHECK(weighted_inner_flat(w, flat_x, flat_y, 2) == weighted_inner(w, x, y));
  const Vector avg = weighted_average(w, x);
  CHECK(avg == Vector{0.25, 1.5});
  CHECK(weighted_average_flat(w, flat_x, 2) == avg);
  CHECK(split_blocks(flat_x, 2) == x);
  CHECK_THROWS_AS(split_blocks(Vector{1, 2, 3}, 2), InvalidArgument);
  CHECK_THROWS_AS(weighted_average(w, std::vector<Vector>{{1, 2}}), InvalidArgument);
}

TEST_CASE("metrics") {
  const Metric e = Metric::euclidean();
  CHECK_FALSE(e.is_weighted());
  CHECK(e.norm_sq(Vector{3, 4}) == 25.0);
  const Metric m = Metric::weighted(WeightVector({0.5, 0.5}), 1);
  CHECK(m.is_weighted());
  CHECK(m.norm_sq(Vector{2, 4}) == doctest::Approx(10.0));
  CHECK_THROWS_AS(m.inner(Vector{1, 2, 3}, Vector{1, 2, 3}), InvalidArgument);
}

TEST_CASE("K norm of the pair space") {
  const PairPoint p{{1, 0}, {0.5, 0}};
  // |x|^2/g - 2<x,u> + l|u|^2
  CHECK(k_norm_sq(p, 0.5, 2.0) == doctest::Approx(2.0 - 1.0 + 0.5));
  CHECK_THROWS_AS(k_norm_sq(p, 2.0, 2.0), InvalidParameter);
  CHECK_THROWS_AS(k_norm_sq(p, 0.0, 2.0), InvalidParameter);
  // positive definite for gamma < lambda, checked on the worst direction u = x/lambda
  const PairPoint q{{1, 1}, {1.0 / 3.0, 1.0 / 3.0}};
  CHECK(k_norm_sq(q, 2.9, 3.0) > 0.0);
}
