#include "opsplit/space.hpp"

#include <cmath>
#include <numeric>

namespace opsplit {

void require_same_size(std::span<const double> a, std::span<const double> b,
                       const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(double s, std::span<const double> a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidParameter("weights: at least one weight is required");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0 && w <= 1.0)) {
      throw InvalidParameter("weights: every weight must lie in (0,1], got " + std::to_string(w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidParameter("weights: must sum to 1, got " + std::to_string(sum));
  }
}

WeightVector WeightVector::uniform(std::size_t m) {
  if (m == 0) throw InvalidParameter("weights: m must be at least 1");
  return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

namespace {

void check_blocks(const WeightVector& w, std::span<const Vector> x) {
  if (x.size() != w.size()) {
    throw InvalidArgument("weighted_inner: expected " + std::to_string(w.size()) +
                          " blocks, got " + std::to_string(x.size()));
  }
  for (const auto& b : x) {
    if (b.size() != x.front().size()) {
      throw InvalidArgument("weighted_inner: blocks must share one dimension");
    }
  }
}

}  // namespace

double weighted_inner(const WeightVector& w, std::span<const Vector> x,
                      std::span<const Vector> y) {
  check_blocks(w, x);
  check_blocks(w, y);
  if (!x.empty() && x.front().size() != y.front().size()) {
    throw InvalidArgument("weighted_inner: x and y block dimensions differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * dot(x[i], y[i]);
  return s;
}

double weighted_inner_flat(const WeightVector& w, std::span<const double> x,
                           std::span<const double> y, std::size_t block_dim) {
  require_same_size(x, y, "weighted_inner_flat");
  if (block_dim == 0 || x.size() != w.size() * block_dim) {
    throw InvalidArgument("weighted_inner_flat: length is not m * block_dim");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s += w[i] * dot(x.subspan(i * block_dim, block_dim), y.subspan(i * block_dim, block_dim));
  }
  return s;
}

Vector weighted_average(const WeightVector& w, std::span<const Vector> blocks) {
  check_blocks(w, blocks);
  Vector out(blocks.front().size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w[i] * blocks[i][k];
  }
  return out;
}

Vector weighted_average_flat(const WeightVector& w, std::span<const double> flat,
                             std::size_t block_dim) {
  if (block_dim == 0 || flat.size() != w.size() * block_dim) {
    throw InvalidArgument("weighted_average_flat: length is not m * block_dim");
  }
  Vector out(block_dim, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t k = 0; k < block_dim; ++k) out[k] += w[i] * flat[i * block_dim + k];
  }
  return out;
}

std::vector<Vector> split_blocks(std::span<const double> flat, std::size_t block_dim) {
  if (block_dim == 0 || flat.size() % block_dim != 0) {
    throw InvalidArgument("split_blocks: length is not a multiple of block_dim");
  }
  std::vector<Vector> blocks;
  for (std::size_t off = 0; off < flat.size(); off += block_dim) {
    blocks.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(off),
                        flat.begin() + static_cast<std::ptrdiff_t>(off + block_dim));
  }
  return blocks;
}

Vector concat_blocks(std::span<const Vector> blocks) {
  Vector out;
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

Metric Metric::weighted(WeightVector w, std::size_t block_dim) {
  if (block_dim == 0) throw InvalidArgument("Metric: block_dim must be positive");
  Metric m;
  m.weights_ = std::move(w);
  m.block_dim_ = block_dim;
  return m;
}

double Metric::inner(std::span<const double> a, std::span<const double> b) const {
  if (!weights_) return dot(a, b);
  return weighted_inner_flat(*weights_, a, b, block_dim_);
}

double k_norm_sq(const PairPoint& p, double gamma, double lambda, const Metric& metric) {
  require_same_size(p.x, p.u, "k_norm_sq");
  if (!(gamma > 0.0) || !(lambda > 0.0)) {
    throw InvalidParameter("k_norm_sq: gamma and lambda must be positive");
  }
  if (!(gamma < lambda)) {
    throw InvalidParameter("k_norm_sq: requires gamma < lambda for positive definiteness");
  }
  return metric.norm_sq(p.x) / gamma - 2.0 * metric.inner(p.x, p.u) +
         lambda * metric.norm_sq(p.u);
}

}  // namespace opsplit
