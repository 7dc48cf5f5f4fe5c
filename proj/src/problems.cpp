#include "opsplit/problems.hpp"

#include <algorithm>
#include <cmath>

namespace opsplit {

// ---------------------------------------------------------------------------
// Minkowski-sum projection

std::vector<ConvexSet> standard_minkowski_sets() {
  return {ConvexSet::segment(2, 0, -2.0, 2.0), ConvexSet::segment(2, 1, -1.0, 1.0),
          ConvexSet::ball({0.0, 0.0}, 1.0)};
}

namespace {

// Identity on the x-block, resolvent of the inverse normal cone on the y-block.
ResolventOperator minkowski_block_operator(const ConvexSet& set) {
  const std::size_t d = set.dimension();
  const ResolventOperator inv = inverse_resolvent(normal_cone_resolvent(set));
  return ResolventOperator(
      [inv, d](double gamma, std::span<const double> v) {
        Vector out(v.begin(), v.end());
        const Vector y = inv.resolve(gamma, v.subspan(d, d));
        std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(d));
        return out;
      },
      "minkowski[" + set.describe() + "]", 2 * d);
}

}  // namespace

MOperatorProblem build_minkowski(const MinkowskiSpec& spec, std::optional<WeightVector> weights) {
  if (spec.sets.empty()) throw InvalidArgument("minkowski: at least one set is required");
  const std::size_t d = spec.f.size();
  if (d == 0) throw InvalidArgument("minkowski: f must be nonempty");
  std::vector<ResolventOperator> a;
  for (const auto& s : spec.sets) {
    if (s.dimension() != d) {
      throw InvalidArgument("minkowski: set " + s.describe() + " does not match |f| = " +
                            std::to_string(d));
    }
    if (s.kind() == ConvexSet::Kind::whole_space) {
      throw InvalidArgument("minkowski: whole_space is not a supported set kind");
    }
    a.push_back(minkowski_block_operator(s));
  }
  WeightVector w = weights ? *weights : WeightVector::uniform(a.size());
  MOperatorProblem p{std::move(a), skew_pair_operator(d), translation_cocoercive(spec.f),
                     std::move(w), 2 * d};
  p.validate();
  return p;
}

std::vector<Vector> minkowski_decomposition(const std::vector<Vector>& subgradients) {
  std::vector<Vector> out;
  for (const auto& a : subgradients) {
    if (a.size() % 2 != 0) throw InvalidArgument("minkowski_decomposition: odd block length");
    const std::size_t d = a.size() / 2;
    out.emplace_back(a.begin() + static_cast<std::ptrdiff_t>(d), a.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic instances

void SyntheticSpec::validate() const {
  if (dim == 0) throw InvalidArgument("synthetic: dimension must be positive");
  if (sets.empty()) throw InvalidArgument("synthetic: at least one set is required");
  for (const auto& s : sets) {
    if (s.dimension() != dim) {
      throw InvalidArgument("synthetic: set " + s.describe() + " does not match dimension " +
                            std::to_string(dim));
    }
  }
  if (!skew.empty() && skew.size() != dim * dim) {
    throw InvalidArgument("synthetic: skew matrix must have dim*dim entries");
  }
  if (f.size() != dim) throw InvalidArgument("synthetic: f must have the problem dimension");
}

SyntheticSpec random_synthetic(std::size_t dim, std::size_t sets, std::mt19937_64& rng) {
  if (dim == 0 || sets == 0) throw InvalidArgument("random_synthetic: empty instance");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticSpec spec;
  spec.dim = dim;
  Vector c(dim);
  for (auto& v : c) v = normal(rng);
  for (std::size_t s = 0; s < sets; ++s) {
    if (unit(rng) < 0.5) {
      Vector lo(dim), hi(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        lo[k] = c[k] - (0.1 + 1.4 * unit(rng));
        hi[k] = c[k] + (0.1 + 1.4 * unit(rng));
      }
      spec.sets.push_back(ConvexSet::box(std::move(lo), std::move(hi)));
    } else {
      Vector center(dim);
      for (std::size_t k = 0; k < dim; ++k) center[k] = c[k] + 0.3 * normal(rng);
      const double r = distance(center, c) + 0.1 + 0.9 * unit(rng);
      spec.sets.push_back(ConvexSet::ball(std::move(center), r));
    }
  }
  if (dim > 1 && unit(rng) >= 0.25) {
    spec.skew.assign(dim * dim, 0.0);
    double fro = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i + 1; j < dim; ++j) {
        const double g = normal(rng);
        spec.skew[i * dim + j] = g;
        fro += 2.0 * g * g;
      }
    }
    const double scale = (0.2 + 0.8 * unit(rng)) / std::sqrt(fro);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i + 1; j < dim; ++j) {
        spec.skew[i * dim + j] *= scale;
        spec.skew[j * dim + i] = -spec.skew[i * dim + j];
      }
    }
  }
  spec.f.resize(dim);
  for (auto& v : spec.f) v = 3.0 * normal(rng);
  return spec;
}

namespace {

ForwardOperator synthetic_forward(const SyntheticSpec& spec) {
  if (spec.skew.empty()) return ForwardOperator::zero(spec.dim);
  return skew_matrix_operator(spec.skew, spec.dim);
}

}  // namespace

FourOperatorProblem build_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  if (spec.sets.size() != 2) {
    throw InvalidArgument("synthetic: the four-operator form needs exactly two sets, got " +
                          std::to_string(spec.sets.size()));
  }
  FourOperatorProblem p{normal_cone_resolvent(spec.sets[0]), normal_cone_resolvent(spec.sets[1]),
                        synthetic_forward(spec), shifted_identity(spec.f), spec.dim};
  p.validate();
  return p;
}

MOperatorProblem build_synthetic_m(const SyntheticSpec& spec, std::optional<WeightVector> weights) {
  spec.validate();
  std::vector<ResolventOperator> a;
  for (const auto& s : spec.sets) a.push_back(normal_cone_resolvent(s));
  WeightVector w = weights ? *weights : WeightVector::uniform(a.size());
  MOperatorProblem p{std::move(a), synthetic_forward(spec), shifted_identity(spec.f), std::move(w),
                     spec.dim};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

struct IntersectionProjection {
  Vector x;
  std::vector<Vector> increments;  // increments[i] in N_{S_i}(x), v - x = sum
};

bool all_boxes(const std::vector<ConvexSet>& sets) {
  for (const auto& s : sets) {
    const auto k = s.kind();
    if (k != ConvexSet::Kind::box && k != ConvexSet::Kind::segment &&
        k != ConvexSet::Kind::whole_space) {
      return false;
    }
  }
  return true;
}

// Intersection of boxes is a box; each clipped coordinate is charged to the
// set owning the binding bound.
IntersectionProjection project_boxes(const std::vector<ConvexSet>& sets, const Vector& v) {
  const std::size_t d = v.size();
  IntersectionProjection out{v, std::vector<Vector>(sets.size(), Vector(d, 0.0))};
  for (std::size_t k = 0; k < d; ++k) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::size_t lo_owner = 0, hi_owner = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].kind() == ConvexSet::Kind::whole_space) continue;
      if (sets[i].lower()[k] > lo) lo = sets[i].lower()[k], lo_owner = i;
      if (sets[i].upper()[k] < hi) hi = sets[i].upper()[k], hi_owner = i;
    }
    if (lo > hi) throw InvalidArgument("oracle: the sets have empty intersection");
    if (v[k] < lo) {
      out.x[k] = lo;
      out.increments[lo_owner][k] = v[k] - lo;
    } else if (v[k] > hi) {
      out.x[k] = hi;
      out.increments[hi_owner][k] = v[k] - hi;
    }
  }
  return out;
}

IntersectionProjection dykstra(const std::vector<ConvexSet>& sets, const Vector& v) {
  const std::size_t d = v.size();
  IntersectionProjection out{v, std::vector<Vector>(sets.size(), Vector(d, 0.0))};
  constexpr std::size_t kMaxCycles = 100000;
  const double scale = 1.0 + norm(v);
  for (std::size_t cycle = 0; cycle < kMaxCycles; ++cycle) {
    double change = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].kind() == ConvexSet::Kind::whole_space) continue;
      const Vector t = add(out.x, out.increments[i]);
      Vector x_new = project(sets[i], t);
      Vector e = subtract(t, x_new);
      change = std::max(change, distance(e, out.increments[i]));
      change = std::max(change, distance(x_new, out.x));
      out.x = std::move(x_new);
      out.increments[i] = std::move(e);
    }
    if (change <= 1e-15 * scale) return out;
  }
  throw SolverError(kMaxCycles, "oracle: Dykstra projection did not converge");
}

IntersectionProjection project_intersection(const std::vector<ConvexSet>& sets, const Vector& v) {
  return all_boxes(sets) ? project_boxes(sets, v) : dykstra(sets, v);
}

}  // namespace

OracleSolution oracle_solve(const SyntheticSpec& spec, double tolerance, std::size_t max_iter) {
  spec.validate();
  const std::size_t d = spec.dim;
  double fro_sq = 0.0;
  for (double s : spec.skew) fro_sq += s * s;
  // F(x) = (I + S) x - f is 1-strongly monotone; with this step the map
  // x - tau F(x) contracts by at most sqrt(1/2) when |S| <= 1.
  const double tau = 1.0 / (1.0 + fro_sq);

  auto residual_map = [&](const Vector& x) {
    Vector fx(d);
    for (std::size_t i = 0; i < d; ++i) {
      double s = x[i] - spec.f[i];
      if (!spec.skew.empty()) {
        for (std::size_t j = 0; j < d; ++j) s += spec.skew[i * d + j] * x[j];
      }
      fx[i] = s;
    }
    return fx;
  };
  auto forward_point = [&](const Vector& x) {
    const Vector fx = residual_map(x);
    Vector v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = x[i] - tau * fx[i];
    return v;
  };

  Vector x(d, 0.0);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const IntersectionProjection pr = project_intersection(spec.sets, forward_point(x));
    const double step = distance(pr.x, x);
    x = pr.x;
    if (step <= tolerance) {
      const IntersectionProjection fin = project_intersection(spec.sets, forward_point(x));
      OracleSolution sol;
      sol.x = fin.x;
      sol.iterations = it;
      for (const auto& e : fin.increments) sol.certificates.push_back(scale(1.0 / tau, e));
      return sol;
    }
  }
  throw SolverError(max_iter, "oracle: projected fixed-point iteration did not converge");
}

// ---------------------------------------------------------------------------
// Residual verification

namespace {

bool verify_impl(const std::vector<const ResolventOperator*>& a, const ForwardOperator& b,
                 const CocoerciveOperator& c, const Vector& x, double tol,
                 std::vector<Vector> candidates) {
  if (!(tol > 0.0)) throw InvalidParameter("verify_solution: tol must be positive");
  const std::size_t d = x.size();
  if (!all_finite(x)) return false;
  const Vector bx = b.eval(x);
  const Vector cx = c.eval(x);
  if (candidates.empty()) {
    candidates.assign(a.size(), Vector(d, 0.0));
    for (std::size_t k = 0; k < d; ++k) candidates[0][k] = -(bx[k] + cx[k]);
  }
  if (candidates.size() != a.size()) {
    throw InvalidArgument("verify_solution: expected one candidate per operator");
  }
  constexpr double gamma = 1.0;
  Vector total = add(bx, cx);
  for (std::size_t i = 0; i < a.size(); ++i) {
    require_same_size(candidates[i], x, "verify_solution");
    Vector v(d);
    for (std::size_t k = 0; k < d; ++k) v[k] = x[k] + gamma * candidates[i][k];
    const Vector p = a[i]->resolve(gamma, v);
    if (distance(p, x) > tol) return false;
    for (std::size_t k = 0; k < d; ++k) total[k] += (v[k] - p[k]) / gamma;
  }
  return norm(total) <= tol;
}

}  // namespace

bool verify_solution(const FourOperatorProblem& p, const Vector& x, double tol,
                     const std::vector<Vector>& candidates) {
  if (x.size() != p.dim) throw InvalidArgument("verify_solution: dimension mismatch");
  return verify_impl({&p.a1, &p.a2}, p.b, p.c, x, tol, candidates);
}

bool verify_solution(const MOperatorProblem& p, const Vector& x, double tol,
                     const std::vector<Vector>& candidates) {
  if (x.size() != p.dim) throw InvalidArgument("verify_solution: dimension mismatch");
  std::vector<const ResolventOperator*> a;
  for (const auto& op : p.a) a.push_back(&op);
  return verify_impl(a, p.b, p.c, x, tol, candidates);
}

}  // namespace opsplit
