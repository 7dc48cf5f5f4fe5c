#include "opsplit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opsplit {

namespace {

void check_dim(std::size_t expected, std::span<const double> v, const std::string& who) {
  if (expected != 0 && v.size() != expected) {
    throw InvalidArgument(who + ": expected dimension " + std::to_string(expected) + ", got " +
                          std::to_string(v.size()));
  }
}

Vector random_vector(std::size_t dim, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> dist(0.0, spread);
  Vector v(dim);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Oracle wrappers

ResolventOperator::ResolventOperator(Fn fn, std::string name, std::size_t dim)
    : fn_(std::move(fn)), name_(std::move(name)), dim_(dim) {
  if (!fn_) throw InvalidArgument("ResolventOperator: empty callable");
}

ResolventOperator ResolventOperator::zero(std::size_t dim) {
  ResolventOperator op([](double, std::span<const double> v) { return Vector(v.begin(), v.end()); },
                       "zero", dim);
  op.zero_ = true;
  return op;
}

Vector ResolventOperator::resolve(double gamma, std::span<const double> v) const {
  if (!(gamma > 0.0)) {
    throw InvalidParameter(name_ + ": resolvent parameter must be positive");
  }
  check_dim(dim_, v, name_);
  return fn_(gamma, v);
}

ForwardOperator::ForwardOperator(Fn fn, double lipschitz, std::string name, std::size_t dim)
    : fn_(std::move(fn)), lipschitz_(lipschitz), name_(std::move(name)), dim_(dim) {
  if (!fn_) throw InvalidArgument("ForwardOperator: empty callable");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw InvalidParameter(name_ + ": Lipschitz constant must be positive and finite "
                                   "(use ForwardOperator::zero for the zero map)");
  }
}

ForwardOperator ForwardOperator::zero(std::size_t dim) {
  ForwardOperator op([](std::span<const double> v) { return Vector(v.size(), 0.0); }, 1.0,
                     "zero", dim);
  op.lipschitz_ = 0.0;
  op.zero_ = true;
  return op;
}

Vector ForwardOperator::eval(std::span<const double> v) const {
  check_dim(dim_, v, name_);
  return fn_(v);
}

CocoerciveOperator::CocoerciveOperator(Fn fn, double beta, std::string name, std::size_t dim)
    : fn_(std::move(fn)), beta_(beta), name_(std::move(name)), dim_(dim) {
  if (!fn_) throw InvalidArgument("CocoerciveOperator: empty callable");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InvalidParameter(name_ + ": cocoercivity constant must be positive and finite "
                                   "(use CocoerciveOperator::zero for the zero map)");
  }
}

CocoerciveOperator CocoerciveOperator::zero(std::size_t dim) {
  CocoerciveOperator op([](std::span<const double> v) { return Vector(v.size(), 0.0); }, 1.0,
                        "zero", dim);
  op.beta_ = std::numeric_limits<double>::infinity();
  op.zero_ = true;
  return op;
}

Vector CocoerciveOperator::eval(std::span<const double> v) const {
  check_dim(dim_, v, name_);
  return fn_(v);
}

// ---------------------------------------------------------------------------
// Convex sets

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
  if (lo.empty() || lo.size() != hi.size()) {
    throw InvalidArgument("box: bounds must be nonempty and of equal dimension");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw InvalidParameter("box: requires lo <= hi in every coordinate");
  }
  ConvexSet s;
  s.kind_ = Kind::box;
  s.dim_ = lo.size();
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

ConvexSet ConvexSet::segment(std::size_t dim, std::size_t axis, double lo, double hi) {
  if (axis >= dim) throw InvalidArgument("segment: axis out of range");
  Vector l(dim, 0.0), h(dim, 0.0);
  l[axis] = lo;
  h[axis] = hi;
  ConvexSet s = box(std::move(l), std::move(h));
  s.kind_ = Kind::segment;
  return s;
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (center.empty()) throw InvalidArgument("ball: center must be nonempty");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidParameter("ball: radius must be positive");
  }
  ConvexSet s;
  s.kind_ = Kind::ball;
  s.dim_ = center.size();
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

ConvexSet ConvexSet::singleton(Vector point) {
  if (point.empty()) throw InvalidArgument("singleton: point must be nonempty");
  ConvexSet s;
  s.kind_ = Kind::singleton;
  s.dim_ = point.size();
  s.center_ = std::move(point);
  return s;
}

ConvexSet ConvexSet::whole_space(std::size_t dim) {
  if (dim == 0) throw InvalidArgument("whole_space: dimension must be positive");
  ConvexSet s;
  s.kind_ = Kind::whole_space;
  s.dim_ = dim;
  return s;
}

bool ConvexSet::contains(std::span<const double> v, double tol) const {
  return v.size() == dim_ && distance(project(*this, v), v) <= tol;
}

const char* to_string(ConvexSet::Kind kind) {
  switch (kind) {
    case ConvexSet::Kind::segment: return "segment";
    case ConvexSet::Kind::box: return "box";
    case ConvexSet::Kind::ball: return "ball";
    case ConvexSet::Kind::singleton: return "singleton";
    case ConvexSet::Kind::whole_space: return "whole_space";
  }
  return "unknown";
}

std::string ConvexSet::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(dim=" << dim_;
  if (kind_ == Kind::ball) os << ", radius=" << radius_;
  os << ")";
  return os.str();
}

Vector project(const ConvexSet& set, std::span<const double> v) {
  if (v.size() != set.dimension()) {
    throw InvalidArgument("project: point has dimension " + std::to_string(v.size()) +
                          ", set " + set.describe());
  }
  switch (set.kind()) {
    case ConvexSet::Kind::segment:
    case ConvexSet::Kind::box: {
      Vector p(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        p[i] = std::clamp(v[i], set.lower()[i], set.upper()[i]);
      }
      return p;
    }
    case ConvexSet::Kind::ball: {
      const auto& c = set.center();
      const double r = distance(v, c);
      if (r <= set.radius()) return Vector(v.begin(), v.end());
      Vector p(v.size());
      const double t = set.radius() / r;
      for (std::size_t i = 0; i < v.size(); ++i) p[i] = c[i] + t * (v[i] - c[i]);
      return p;
    }
    case ConvexSet::Kind::singleton:
      return set.center();
    case ConvexSet::Kind::whole_space:
      return Vector(v.begin(), v.end());
  }
  throw InvalidArgument("project: unsupported set kind");
}

// ---------------------------------------------------------------------------
// Operator library

ResolventOperator normal_cone_resolvent(const ConvexSet& set) {
  if (set.kind() == ConvexSet::Kind::whole_space) {
    return ResolventOperator::zero(set.dimension());
  }
  return ResolventOperator([set](double, std::span<const double> v) { return project(set, v); },
                           std::string("normal_cone[") + set.describe() + "]", set.dimension());
}

ResolventOperator inverse_resolvent(const ResolventOperator& a) {
  return ResolventOperator(
      [a](double gamma, std::span<const double> v) {
        Vector scaled(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) scaled[i] = v[i] / gamma;
        const Vector p = a.resolve(1.0 / gamma, scaled);
        Vector out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - gamma * p[i];
        return out;
      },
      "inverse[" + a.name() + "]", a.dimension());
}

ResolventOperator weighted_resolvent(const ResolventOperator& a, double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) {
    throw InvalidParameter("weighted_resolvent: weight must lie in (0,1]");
  }
  if (omega == 1.0) return a;
  if (a.is_zero()) return ResolventOperator::zero(a.dimension());
  return ResolventOperator(
      [a, omega](double gamma, std::span<const double> v) { return a.resolve(gamma / omega, v); },
      a.name() + "/w", a.dimension());
}

ForwardOperator skew_pair_operator(std::size_t block_size) {
  if (block_size == 0) throw InvalidArgument("skew_pair_operator: block size must be positive");
  return ForwardOperator(
      [block_size](std::span<const double> v) {
        Vector out(v.size());
        for (std::size_t i = 0; i < block_size; ++i) {
          out[i] = v[block_size + i];
          out[block_size + i] = -v[i];
        }
        return out;
      },
      1.0, "skew_pair", 2 * block_size);
}

ForwardOperator skew_matrix_operator(std::vector<double> matrix, std::size_t dim) {
  if (dim == 0 || matrix.size() != dim * dim) {
    throw InvalidArgument("skew_matrix_operator: matrix must be dim x dim");
  }
  double fro = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (matrix[i * dim + j] != -matrix[j * dim + i]) {
        throw InvalidArgument("skew_matrix_operator: matrix is not skew-symmetric");
      }
      fro += matrix[i * dim + j] * matrix[i * dim + j];
    }
  }
  if (fro == 0.0) return ForwardOperator::zero(dim);
  return ForwardOperator(
      [matrix = std::move(matrix), dim](std::span<const double> v) {
        Vector out(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
          double s = 0.0;
          for (std::size_t j = 0; j < dim; ++j) s += matrix[i * dim + j] * v[j];
          out[i] = s;
        }
        return out;
      },
      std::sqrt(fro), "skew_matrix", dim);
}

CocoerciveOperator translation_cocoercive(Vector f) {
  if (f.empty()) throw InvalidArgument("translation_cocoercive: f must be nonempty");
  const std::size_t d = f.size();
  return CocoerciveOperator(
      [f = std::move(f)](std::span<const double> v) {
        const std::size_t d = f.size();
        Vector out(2 * d, 0.0);
        for (std::size_t i = 0; i < d; ++i) out[i] = v[i] - f[i];
        return out;
      },
      1.0, "translation", 2 * d);
}

CocoerciveOperator shifted_identity(Vector f) {
  if (f.empty()) throw InvalidArgument("shifted_identity: f must be nonempty");
  const std::size_t d = f.size();
  return CocoerciveOperator(
      [f = std::move(f)](std::span<const double> v) {
        Vector out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - f[i];
        return out;
      },
      1.0, "shifted_identity", d);
}

// ---------------------------------------------------------------------------
// Sampled validators

ValidationReport check_firmly_nonexpansive(const ResolventOperator& a, double gamma,
                                           std::size_t dim, std::size_t samples,
                                           std::mt19937_64& rng, double spread) {
  ValidationReport r;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = random_vector(dim, rng, spread);
    const Vector y = random_vector(dim, rng, spread);
    const Vector jx = a.resolve(gamma, x);
    const Vector jy = a.resolve(gamma, y);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double dj = jx[i] - jy[i];
      const double dr = (x[i] - jx[i]) - (y[i] - jy[i]);
      lhs += dj * dj + dr * dr;
      rhs += (x[i] - y[i]) * (x[i] - y[i]);
    }
    r.worst_violation = std::max(r.worst_violation, lhs - rhs);
    ++r.samples;
  }
  return r;
}

ValidationReport check_monotone_lipschitz(const ForwardOperator& b, std::size_t dim,
                                          std::size_t samples, std::mt19937_64& rng,
                                          double spread) {
  ValidationReport r;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = random_vector(dim, rng, spread);
    const Vector y = random_vector(dim, rng, spread);
    const Vector dx = subtract(x, y);
    const Vector db = subtract(b.eval(x), b.eval(y));
    r.worst_violation = std::max(r.worst_violation, -dot(dx, db));
    r.worst_violation = std::max(r.worst_violation, norm(db) - b.lipschitz() * norm(dx));
    ++r.samples;
  }
  return r;
}

ValidationReport check_cocoercive(const CocoerciveOperator& c, std::size_t dim,
                                  std::size_t samples, std::mt19937_64& rng, double spread) {
  ValidationReport r;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = random_vector(dim, rng, spread);
    const Vector y = random_vector(dim, rng, spread);
    const Vector dx = subtract(x, y);
    const Vector dc = subtract(c.eval(x), c.eval(y));
    const double lhs = c.is_zero() ? 0.0 : c.beta() * norm_sq(dc);
    r.worst_violation = std::max(r.worst_violation, lhs - dot(dx, dc));
    ++r.samples;
  }
  return r;
}

ValidationReport check_moreau_identity(const ResolventOperator& a, std::size_t dim,
                                       std::size_t samples, std::mt19937_64& rng,
                                       double spread) {
  const ResolventOperator inv = inverse_resolvent(a);
  std::uniform_real_distribution<double> log_gamma(std::log(1e-2), std::log(1e2));
  ValidationReport r;
  for (std::size_t s = 0; s < samples; ++s) {
    const double gamma = std::exp(log_gamma(rng));
    const Vector v = random_vector(dim, rng, spread);
    const Vector j = a.resolve(gamma, v);
    Vector scaled(dim);
    for (std::size_t i = 0; i < dim; ++i) scaled[i] = v[i] / gamma;
    const Vector k = inv.resolve(1.0 / gamma, scaled);
    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) err = std::max(err, std::abs(j[i] + gamma * k[i] - v[i]));
    r.worst_violation = std::max(r.worst_violation, err);
    ++r.samples;
  }
  return r;
}

}  // namespace opsplit
