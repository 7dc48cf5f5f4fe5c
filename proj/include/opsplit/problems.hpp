#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "opsplit/lifting.hpp"
#include "opsplit/operators.hpp"
#include "opsplit/splitting.hpp"

namespace opsplit {

/// Projection of f onto the Minkowski sum M_1 + ... + M_k of planar sets.
struct MinkowskiSpec {
  std::vector<ConvexSet> sets;
  Vector f;
};

/// Sets [-2,2]x{0}, {0}x[-1,1] and the closed unit ball.
std::vector<ConvexSet> standard_minkowski_sets();

/// Inclusion on R^4 = pairs (x, y) of planar blocks: C(x,y) = (x - f, 0),
/// B(x,y) = (y, -x), and A_i the identity resolvent on x combined with the
/// inverse normal cone of M_i on y. The x-block of a solution is the projection.
MOperatorProblem build_minkowski(const MinkowskiSpec& spec,
                                 std::optional<WeightVector> weights = std::nullopt);

/// Offset and length of the x-block inside the lifted iterate.
inline constexpr std::size_t kMinkowskiBlock = 2;

/// Points m_i in M_i read off the y-blocks of implied subgradients. Their sum
/// approximates the projection.
std::vector<Vector> minkowski_decomposition(const std::vector<Vector>& subgradients);

/// 0 in N_{S_1} x + ... + N_{S_m} x + S x + (x - f), S skew (possibly zero).
struct SyntheticSpec {
  std::size_t dim = 0;
  std::vector<ConvexSet> sets;
  std::vector<double> skew;  // row-major dim x dim; empty means B = 0
  Vector f;

  void validate() const;
};

/// Random instance: `sets` boxes or balls sharing an interior point, a skew
/// part of Frobenius norm at most 1 (zero with probability 1/4) and a random f.
SyntheticSpec random_synthetic(std::size_t dim, std::size_t sets, std::mt19937_64& rng);

/// Four-operator form; requires exactly two sets (A1 = N_{S_1}, A2 = N_{S_2}).
FourOperatorProblem build_synthetic(const SyntheticSpec& spec);
/// Product-space form with one operator per set.
MOperatorProblem build_synthetic_m(const SyntheticSpec& spec,
                                   std::optional<WeightVector> weights = std::nullopt);

struct OracleSolution {
  Vector x;
  /// certificates[i] in N_{S_i}(x) with sum = -(S x + x - f).
  std::vector<Vector> certificates;
  std::size_t iterations = 0;
};

/// Independent solve by projected fixed-point iteration on the intersection
/// of the sets (closed form for boxes, Dykstra's algorithm otherwise). Throws
/// SolverError when the requested accuracy is not reached.
OracleSolution oracle_solve(const SyntheticSpec& spec, double tolerance = 1e-13,
                            std::size_t max_iter = 200000);

/// Residual test of 0 in sum A_i x + B x + C x. For each operator the
/// candidate a_i is checked through one resolve at v = x + a_i: J(v) must
/// return x. Without candidates, a_1 = -(Bx + Cx) and a_i = 0 otherwise.
bool verify_solution(const FourOperatorProblem& p, const Vector& x, double tol,
                     const std::vector<Vector>& candidates = {});
bool verify_solution(const MOperatorProblem& p, const Vector& x, double tol,
                     const std::vector<Vector>& candidates = {});

}  // namespace opsplit
