#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsplit {

/// Dense real coordinate vector; the ambient space is R^d.
using Vector = std::vector<double>;

/// Thrown when shapes, lengths, or block structure do not match.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a scalar parameter (stepsize, weight, radius, ...) is out of range.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
double norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector scale(double s, std::span<const double> a);

void require_same_size(std::span<const double> a, std::span<const double> b,
                       const char* what);

/// Convex-combination weights of the product space: each in (0,1], summing to 1.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit WeightVector(std::vector<double> weights);
  static WeightVector uniform(std::size_t m);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> values() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// Sum_i w_i <x_i, y_i> over m blocks of a common dimension.
double weighted_inner(const WeightVector& w, std::span<const Vector> x,
                      std::span<const Vector> y);

/// Same inner product on flat concatenations of m blocks of size `block_dim`.
double weighted_inner_flat(const WeightVector& w, std::span<const double> x,
                           std::span<const double> y, std::size_t block_dim);

/// Weighted average Sum_i w_i x_i. Every diagonal projection goes through this
/// routine so that direct and lifted code paths accumulate identically.
Vector weighted_average(const WeightVector& w, std::span<const Vector> blocks);
Vector weighted_average_flat(const WeightVector& w, std::span<const double> flat,
                             std::size_t block_dim);

std::vector<Vector> split_blocks(std::span<const double> flat, std::size_t block_dim);
Vector concat_blocks(std::span<const Vector> blocks);

/// Inner product used by diagnostics: plain Euclidean, or the weighted
/// product-space inner product on flat block vectors.
class Metric {
 public:
  static Metric euclidean() { return Metric{}; }
  static Metric weighted(WeightVector w, std::size_t block_dim);

  double inner(std::span<const double> a, std::span<const double> b) const;
  double norm_sq(std::span<const double> a) const { return inner(a, a); }
  bool is_weighted() const noexcept { return weights_.has_value(); }

 private:
  Metric() = default;
  std::optional<WeightVector> weights_;
  std::size_t block_dim_ = 0;
};

/// Point (x, u) of the pair space used by the Douglas-Rachford type method.
struct PairPoint {
  Vector x;
  Vector u;
};

/// (1/gamma)|x|^2 - 2<x,u> + lambda|u|^2 under the given metric.
/// Positive definite only for gamma < lambda.
double k_norm_sq(const PairPoint& p, double gamma, double lambda,
                 const Metric& metric = Metric::euclidean());

}  // namespace opsplit
