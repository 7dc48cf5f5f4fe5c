#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "opsplit/space.hpp"

namespace opsplit {

/// Maximally monotone operator A accessed through its resolvent
/// J_{gamma A} = (Id + gamma A)^{-1}. The callable must be deterministic.
class ResolventOperator {
 public:
  using Fn = std::function<Vector(double gamma, std::span<const double> v)>;

  /// `dim == 0` means the operator accepts any dimension.
  ResolventOperator(Fn fn, std::string name, std::size_t dim = 0);

  /// The zero operator; its resolvent is the identity for every gamma.
  static ResolventOperator zero(std::size_t dim = 0);

  Vector resolve(double gamma, std::span<const double> v) const;

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dim_; }
  bool is_zero() const noexcept { return zero_; }

 private:
  Fn fn_;
  std::string name_;
  std::size_t dim_ = 0;
  bool zero_ = false;
};

/// Single-valued monotone L-Lipschitz operator, used only through forward evaluations.
class ForwardOperator {
 public:
  using Fn = std::function<Vector(std::span<const double> v)>;

  ForwardOperator(Fn fn, double lipschitz, std::string name, std::size_t dim = 0);

  /// Zero map. Carries L = 0 together with the zero flag so stepsize rules
  /// can take the L -> 0 limit.
  static ForwardOperator zero(std::size_t dim = 0);

  Vector eval(std::span<const double> v) const;

  double lipschitz() const noexcept { return lipschitz_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dim_; }
  bool is_zero() const noexcept { return zero_; }

 private:
  Fn fn_;
  double lipschitz_ = 0.0;
  std::string name_;
  std::size_t dim_ = 0;
  bool zero_ = false;
};

/// Single-valued beta-cocoercive operator. The zero operator has beta = +inf.
class CocoerciveOperator {
 public:
  using Fn = std::function<Vector(std::span<const double> v)>;

  CocoerciveOperator(Fn fn, double beta, std::string name, std::size_t dim = 0);

  static CocoerciveOperator zero(std::size_t dim = 0);

  Vector eval(std::span<const double> v) const;

  double beta() const noexcept { return beta_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dim_; }
  bool is_zero() const noexcept { return zero_; }

 private:
  Fn fn_;
  double beta_ = 0.0;
  std::string name_;
  std::size_t dim_ = 0;
  bool zero_ = false;
};

/// Closed convex set with an exact Euclidean projection.
class ConvexSet {
 public:
  enum class Kind { segment, box, ball, singleton, whole_space };

  static ConvexSet box(Vector lo, Vector hi);
  /// {t e_axis : lo <= t <= hi} in R^dim (all other coordinates zero).
  static ConvexSet segment(std::size_t dim, std::size_t axis, double lo, double hi);
  static ConvexSet ball(Vector center, double radius);
  static ConvexSet singleton(Vector point);
  static ConvexSet whole_space(std::size_t dim);

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }

  // box/segment bounds
  const Vector& lower() const noexcept { return lo_; }
  const Vector& upper() const noexcept { return hi_; }
  // ball/singleton
  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

  bool contains(std::span<const double> v, double tol = 1e-12) const;
  std::string describe() const;

 private:
  ConvexSet() = default;
  Kind kind_ = Kind::whole_space;
  std::size_t dim_ = 0;
  Vector lo_, hi_, center_;
  double radius_ = 0.0;
};

const char* to_string(ConvexSet::Kind kind);

/// Euclidean projection P_S(v).
Vector project(const ConvexSet& set, std::span<const double> v);

/// J_{gamma N_S} = P_S for every gamma.
ResolventOperator normal_cone_resolvent(const ConvexSet& set);

/// Resolvent of A^{-1} via the Moreau decomposition:
/// J_{gamma A^{-1}}(v) = v - gamma J_{A/gamma}(v/gamma).
ResolventOperator inverse_resolvent(const ResolventOperator& a);

/// Resolvent of A/omega: resolve(gamma, v) = A.resolve(gamma/omega, v), omega in (0,1].
ResolventOperator weighted_resolvent(const ResolventOperator& a, double omega);

/// (x, y) -> (y, -x) on two blocks of `block_size` coordinates; L = 1.
ForwardOperator skew_pair_operator(std::size_t block_size);

/// v -> S v for a skew-symmetric S (row-major). The declared Lipschitz
/// constant is the Frobenius norm of S, an upper bound of the spectral norm.
ForwardOperator skew_matrix_operator(std::vector<double> matrix, std::size_t dim);

/// (x, y) -> (x - f, 0) with x, y of dimension |f|; beta = 1.
CocoerciveOperator translation_cocoercive(Vector f);

/// x -> x - f; beta = 1.
CocoerciveOperator shifted_identity(Vector f);

/// Largest violation found by a sampled property check (<= 0 means none).
struct ValidationReport {
  double worst_violation = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  bool passed(double tol) const { return worst_violation <= tol; }
};

/// |Jx-Jy|^2 + |(x-Jx)-(y-Jy)|^2 - |x-y|^2 over random pairs.
ValidationReport check_firmly_nonexpansive(const ResolventOperator& a, double gamma,
                                           std::size_t dim, std::size_t samples,
                                           std::mt19937_64& rng, double spread = 5.0);

/// max(-<x-y,Bx-By>, |Bx-By| - L|x-y|) over random pairs.
ValidationReport check_monotone_lipschitz(const ForwardOperator& b, std::size_t dim,
                                          std::size_t samples, std::mt19937_64& rng,
                                          double spread = 5.0);

/// beta|Cx-Cy|^2 - <x-y,Cx-Cy> over random pairs.
ValidationReport check_cocoercive(const CocoerciveOperator& c, std::size_t dim,
                                  std::size_t samples, std::mt19937_64& rng,
                                  double spread = 5.0);

/// | J_{gamma A}(v) + gamma J_{A^{-1}/gamma}(v/gamma) - v | over random (gamma, v).
ValidationReport check_moreau_identity(const ResolventOperator& a, std::size_t dim,
                                       std::size_t samples, std::mt19937_64& rng,
                                       double spread = 5.0);

}  // namespace opsplit
