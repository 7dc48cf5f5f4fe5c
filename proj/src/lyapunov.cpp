#include <cmath>

#include "opsplit/splitting.hpp"

namespace opsplit {

namespace {

double product_bl(double beta, double lipschitz) {
  return lipschitz == 0.0 ? 0.0 : beta * lipschitz;
}

// gamma / beta with beta = inf meaning C = 0.
double ratio(double gamma, double beta) { return std::isinf(beta) ? 0.0 : gamma / beta; }

const Vector& back(const std::deque<Vector>& d, std::size_t k) { return d[d.size() - 1 - k]; }

void require_window(const std::deque<Vector>& d, std::size_t need, const char* what) {
  if (d.size() < need) {
    throw InvalidArgument(std::string("Lyapunov: history of ") + what + " needs " +
                          std::to_string(need) + " entries, got " + std::to_string(d.size()));
  }
}

Vector diff(const Vector& a, const Vector& b) { return subtract(a, b); }

}  // namespace

LyapunovConstants lyapunov_constants(Algorithm alg, double beta, double lipschitz, double gamma,
                                     std::optional<double> lambda) {
  const double t = product_bl(beta, lipschitz);
  LyapunovConstants k;
  switch (base_algorithm(alg)) {
    case Algorithm::bsfrb: {
      k.a = 1.0;
      const double q = std::isinf(t) ? 0.0 : 1.0 / (1.0 + 4.0 * t);
      k.eps = q / 4.0;
      k.eps_prime = 1.0 - q - 8.0 * gamma * lipschitz;
      break;
    }
    case Algorithm::bsrfb: {
      k.a = bsrfb_a(beta, lipschitz);
      const double inv_a = 1.0 / k.a;
      k.eps = std::isinf(t) ? 0.0 : 1.0 / (5.0 + (10.0 + 6.0 * inv_a) * t);
      k.eps_prime = 1.0 - 4.0 * k.eps - 8.0 * ratio(gamma, beta) -
                    (20.0 + 12.0 * inv_a) * gamma * lipschitz;
      break;
    }
    case Algorithm::sfrdr: {
      if (!lambda) throw InvalidParameter("lambda required for sfrdr");
      const double lam = *lambda;
      k.a = 1.0;
      k.eps = 0.0;
      const double gap = lam - gamma;
      if (std::isinf(beta)) {
        k.eps_prime = (gap - 2.0 * lam * gamma * lipschitz) / (2.0 * gap);
      } else {
        k.eps_prime = (beta * gap - lam * gamma * (2.0 * t + 1.0)) / (2.0 * beta * gap);
      }
      break;
    }
    default: throw InvalidArgument("lyapunov_constants: unsupported algorithm");
  }
  return k;
}

std::size_t lyapunov_warmup(Algorithm alg) {
  switch (base_algorithm(alg)) {
    case Algorithm::bsfrb: return 2;
    case Algorithm::bsrfb: return 3;
    default: return 0;
  }
}

void SplitHistory::push(const Vector& z_new, const Vector& y_new, std::size_t keep) {
  z.push_back(z_new);
  y.push_back(y_new);
  while (z.size() > keep) z.pop_front();
  while (y.size() > keep) y.pop_front();
}

void PairHistory::push(const Vector& x_new, const Vector& u_new, std::size_t keep) {
  x.push_back(x_new);
  u.push_back(u_new);
  while (x.size() > keep) x.pop_front();
  while (u.size() > keep) u.pop_front();
}

double lyapunov_bsfrb(const ForwardOperator& b, double beta, double gamma,
                      const SplitAnchor& anchor, const SplitHistory& h, const Metric& metric) {
  require_window(h.z, 3, "z");
  require_window(h.y, 2, "y");
  const double lip = b.lipschitz();
  const LyapunovConstants k = lyapunov_constants(Algorithm::bsfrb, beta, lip, gamma);
  const Vector& z0 = back(h.z, 0);
  const Vector& z1 = back(h.z, 1);
  const Vector& z2 = back(h.z, 2);
  const Vector& y0 = back(h.y, 0);
  const Vector& y1 = back(h.y, 1);

  const Vector db = diff(b.eval(y0), b.eval(y1));
  return metric.norm_sq(diff(z0, anchor.z)) + 2.0 * gamma * metric.inner(db, diff(anchor.x, y0)) +
         (6.0 * gamma * lip + 2.0 * k.eps) * metric.norm_sq(diff(z0, z1)) +
         2.0 * gamma * lip * metric.norm_sq(diff(z1, z2));
}

double lyapunov_bsrfb(const ForwardOperator& b, double beta, double gamma,
                      const SplitAnchor& anchor, const SplitHistory& h, const Metric& metric) {
  require_window(h.z, 4, "z");
  require_window(h.y, 3, "y");
  const double lip = b.lipschitz();
  const LyapunovConstants k = lyapunov_constants(Algorithm::bsrfb, beta, lip, gamma);
  const double inv_a = 1.0 / k.a;
  const double gb = ratio(gamma, beta);
  const double gl = gamma * lip;
  // (1 + a) gamma L has the limit 0 when L = 0 even though a = inf there.
  const double reflect_weight = lip == 0.0 ? 0.0 : 2.0 * (1.0 + k.a) * gl;

  const Vector& z0 = back(h.z, 0);
  const Vector& z1 = back(h.z, 1);
  const Vector& z2 = back(h.z, 2);
  const Vector& z3 = back(h.z, 3);
  const Vector& y0 = back(h.y, 0);
  const Vector& y1 = back(h.y, 1);
  const Vector& y2 = back(h.y, 2);

  Vector y_hat(y1.size()), z_hat(z1.size());
  for (std::size_t i = 0; i < y1.size(); ++i) y_hat[i] = 2.0 * y1[i] - y2[i];
  for (std::size_t i = 0; i < z1.size(); ++i) z_hat[i] = 2.0 * z1[i] - z2[i];

  const Vector db = diff(b.eval(y_hat), b.eval(anchor.x));
  return metric.norm_sq(diff(z0, anchor.z)) + 2.0 * gamma * metric.inner(db, diff(y0, y1)) +
         (1.0 + 2.0 * k.eps + 6.0 * gb + (20.0 + 12.0 * inv_a) * gl) * metric.norm_sq(diff(z0, z1)) +
         (2.0 * gb + (14.0 + 10.0 * inv_a) * gl) * metric.norm_sq(diff(z1, z2)) +
         4.0 * (1.0 + inv_a) * gl * metric.norm_sq(diff(z2, z3)) +
         reflect_weight * metric.norm_sq(diff(z0, z_hat));
}

double lyapunov_sfrdr(const ForwardOperator& b, double gamma, double lambda,
                      const PairAnchor& anchor, const PairHistory& h, const Metric& metric) {
  require_window(h.x, 2, "x");
  require_window(h.u, 2, "u");
  const Vector& x0 = back(h.x, 0);
  const Vector& x1 = back(h.x, 1);
  const Vector& u0 = back(h.u, 0);
  const Vector& u1 = back(h.u, 1);

  const double dist_sq =
      k_norm_sq(PairPoint{diff(x0, anchor.x), diff(u0, anchor.u)}, gamma, lambda, metric);
  const double step_sq = k_norm_sq(PairPoint{diff(x0, x1), diff(u0, u1)}, gamma, lambda, metric);
  const Vector db = diff(b.eval(x0), b.eval(x1));
  return dist_sq + 2.0 * metric.inner(db, diff(anchor.x, x0)) + 0.5 * step_sq;
}

}  // namespace opsplit
