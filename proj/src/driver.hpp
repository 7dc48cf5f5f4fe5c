#pragma once

// Iteration loop shared by the four-operator and product-space solvers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "opsplit/splitting.hpp"

namespace opsplit::detail {

inline std::optional<double> target_distance(const StoppingRule& stop, const Vector& iterate) {
  if (stop.kind != StoppingRule::Kind::known_solution) return std::nullopt;
  if (stop.offset + stop.target.size() > iterate.size()) {
    throw InvalidArgument("stopping rule: target of length " + std::to_string(stop.target.size()) +
                          " at offset " + std::to_string(stop.offset) +
                          " does not fit an iterate of length " + std::to_string(iterate.size()));
  }
  return distance(std::span<const double>(iterate).subspan(stop.offset, stop.target.size()),
                  stop.target);
}

inline void validate_options(const RunOptions& options) {
  if (options.max_iter == 0) throw InvalidParameter("max_iter must be at least 1");
  if (!(options.stop.epsilon > 0.0)) throw InvalidParameter("stopping epsilon must be positive");
  if (options.stop.kind == StoppingRule::Kind::known_solution && options.stop.target.empty()) {
    throw InvalidArgument("known_solution stopping rule needs a target");
  }
}

/// Stepper requirements:
///   const Vector& monitor() const;   current monitored iterate
///   void advance();                  one iteration
///   double residual() const;         fixed-point residual of the last step
///   bool healthy(double bound) const;
///   std::optional<double> lyapunov();
///   FinalState final_state() const;
template <class Stepper>
RunTrace drive(Stepper& st, const RunOptions& options, std::vector<std::string> warnings) {
  validate_options(options);
  const auto t0 = std::chrono::steady_clock::now();

  RunTrace trace;
  trace.warnings = std::move(warnings);
  trace.records.reserve(std::min<std::size_t>(options.max_iter + 1, 1 << 16));

  auto make_record = [&](std::size_t n, double residual, bool healthy) {
    IterationRecord rec;
    rec.n = n;
    rec.residual = residual;
    if (options.keep_iterates) rec.iterate = st.monitor();
    rec.distance = target_distance(options.stop, st.monitor());
    if (healthy) rec.lyapunov = st.lyapunov();
    return rec;
  };

  trace.records.push_back(make_record(0, 0.0, true));
  trace.termination = Termination::max_iter;

  for (std::size_t n = 1; n <= options.max_iter; ++n) {
    try {
      st.advance();
    } catch (const SolverError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolverError(n - 1, e.what());
    }
    trace.iterations = n;
    const bool healthy = st.healthy(options.divergence_bound);
    trace.records.push_back(make_record(n, st.residual(), healthy));
    if (!healthy) {
      trace.termination = Termination::diverged;
      break;
    }
    const IterationRecord& rec = trace.records.back();
    const double measure =
        options.stop.kind == StoppingRule::Kind::known_solution ? *rec.distance : rec.residual;
    if (measure <= options.stop.epsilon) {
      trace.termination = Termination::converged;
      break;
    }
  }

  trace.final_state = st.final_state();
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

inline Vector or_zeros(Vector v, std::size_t dim, const char* what) {
  if (v.empty()) return Vector(dim, 0.0);
  if (v.size() != dim) {
    throw InvalidArgument(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(v.size()));
  }
  return v;
}

inline void expect_dim(const Vector& v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    throw InvalidArgument(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(v.size()));
  }
}

// Operators are user code; guard against wrong-sized results.
inline Vector checked(Vector v, std::size_t dim, const std::string& who) {
  if (v.size() != dim) {
    throw InvalidArgument("operator '" + who + "' returned dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(dim));
  }
  return v;
}

template <class F>
auto guarded(std::size_t n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SolverError&) {
    throw;
  } catch (const std::exception& e) {
    throw SolverError(n, e.what());
  }
}

inline bool bounded(std::span<const double> v, double bound) {
  return all_finite(v) && norm(v) <= bound;
}

/// Residual of a pair step in the K metric, clamped at zero so that boundary
/// stepsizes in permissive mode still report a number.
inline double pair_residual(std::span<const double> dx, std::span<const double> du, double gamma,
                            double lambda, const Metric& metric) {
  const double q = metric.norm_sq(dx) / gamma - 2.0 * metric.inner(dx, du) +
                   lambda * metric.norm_sq(du);
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace opsplit::detail
