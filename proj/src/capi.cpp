#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "opsplit/config.hpp"
#include "opsplit/lifting.hpp"
#include "opsplit/opsplit.h"
#include "opsplit/problems.hpp"
#include "opsplit/splitting.hpp"

#ifndef OPSPLIT_VERSION
#define OPSPLIT_VERSION "0.0.0"
#endif

using namespace opsplit;

struct opsplit_problem {
  std::optional<MinkowskiSpec> minkowski;
  std::optional<SyntheticSpec> synthetic;
  std::optional<WeightVector> weights;
};

struct opsplit_trace {
  RunTrace trace;
  std::string csv;
};

struct opsplit_config {
  RunConfig config;
};

struct opsplit_table {
  TableResult result;
  std::string text;
};

namespace {

thread_local std::string g_last_error;

opsplit_status fail(opsplit_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
opsplit_status guard(F&& f) {
  try {
    f();
    return OPSPLIT_OK;
  } catch (const ConfigError& e) {
    return fail(OPSPLIT_CONFIG_ERROR, e.what());
  } catch (const InvalidParameter& e) {
    return fail(OPSPLIT_INVALID_PARAMETER, e.what());
  } catch (const InvalidArgument& e) {
    return fail(OPSPLIT_INVALID_ARGUMENT, e.what());
  } catch (const SolverError& e) {
    return fail(OPSPLIT_SOLVER_ERROR, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(OPSPLIT_INVALID_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(OPSPLIT_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(OPSPLIT_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(OPSPLIT_INTERNAL_ERROR, "unknown exception");
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw InvalidArgument(what);
}

Algorithm to_cpp(opsplit_algorithm a) {
  switch (a) {
    case OPSPLIT_BSFRB: return Algorithm::bsfrb;
    case OPSPLIT_BSRFB: return Algorithm::bsrfb;
    case OPSPLIT_SFRDR: return Algorithm::sfrdr;
    case OPSPLIT_M_BSFRB: return Algorithm::m_bsfrb;
    case OPSPLIT_M_BSRFB: return Algorithm::m_bsrfb;
    case OPSPLIT_M_SFRDR: return Algorithm::m_sfrdr;
  }
  throw InvalidArgument("unknown algorithm code");
}

opsplit_algorithm to_c(Algorithm a) {
  switch (a) {
    case Algorithm::bsfrb: return OPSPLIT_BSFRB;
    case Algorithm::bsrfb: return OPSPLIT_BSRFB;
    case Algorithm::sfrdr: return OPSPLIT_SFRDR;
    case Algorithm::m_bsfrb: return OPSPLIT_M_BSFRB;
    case Algorithm::m_bsrfb: return OPSPLIT_M_BSRFB;
    case Algorithm::m_sfrdr: return OPSPLIT_M_SFRDR;
  }
  return OPSPLIT_BSFRB;
}

opsplit_termination to_c(Termination t) {
  switch (t) {
    case Termination::converged: return OPSPLIT_CONVERGED;
    case Termination::max_iter: return OPSPLIT_MAX_ITER;
    case Termination::diverged: return OPSPLIT_DIVERGED;
  }
  return OPSPLIT_DIVERGED;
}

StepsizeMode to_cpp(opsplit_mode m) {
  if (m == OPSPLIT_MODE_STRICT) return StepsizeMode::strict;
  if (m == OPSPLIT_MODE_PERMISSIVE) return StepsizeMode::permissive;
  throw InvalidArgument("stepsize mode must be strict or permissive here");
}

Vector copy_array(const double* p, std::size_t n, const char* what) {
  if (n == 0) return {};
  if (!p) throw InvalidArgument(std::string(what) + " must not be NULL");
  return Vector(p, p + n);
}

ConvexSet to_set(const opsplit_set& s) {
  switch (s.kind) {
    case OPSPLIT_SET_SEGMENT: return ConvexSet::segment(s.dim, s.axis, s.lo, s.hi);
    case OPSPLIT_SET_BOX:
      return ConvexSet::box(copy_array(s.lower, s.dim, "lower"), copy_array(s.upper, s.dim, "upper"));
    case OPSPLIT_SET_BALL: return ConvexSet::ball(copy_array(s.center, s.dim, "center"), s.radius);
    case OPSPLIT_SET_SINGLETON: return ConvexSet::singleton(copy_array(s.center, s.dim, "center"));
    case OPSPLIT_SET_WHOLE_SPACE: return ConvexSet::whole_space(s.dim);
  }
  throw InvalidArgument("unknown set kind");
}

std::vector<ConvexSet> to_sets(const opsplit_set* sets, std::size_t n) {
  require(n > 0 && sets, "at least one set is required");
  std::vector<ConvexSet> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(to_set(sets[i]));
  return out;
}

std::optional<WeightVector> to_weights(const double* w, std::size_t m) {
  if (!w) return std::nullopt;
  return WeightVector(Vector(w, w + m));
}

std::size_t iterate_dim(const opsplit_problem& p) {
  return p.minkowski ? 2 * p.minkowski->f.size() : p.synthetic->dim;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

extern "C" {

const char* opsplit_version(void) { return OPSPLIT_VERSION; }

const char* opsplit_last_error(void) { return g_last_error.c_str(); }

const char* opsplit_status_string(opsplit_status status) {
  switch (status) {
    case OPSPLIT_OK: return "ok";
    case OPSPLIT_INVALID_ARGUMENT: return "invalid argument";
    case OPSPLIT_INVALID_PARAMETER: return "invalid parameter";
    case OPSPLIT_SOLVER_ERROR: return "solver error";
    case OPSPLIT_CONFIG_ERROR: return "configuration error";
    case OPSPLIT_IO_ERROR: return "I/O error";
    case OPSPLIT_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* opsplit_algorithm_name(opsplit_algorithm alg) {
  try {
    return to_string(to_cpp(alg));
  } catch (...) {
    return "unknown";
  }
}

opsplit_status opsplit_algorithm_from_name(const char* name, opsplit_algorithm* out) {
  return guard([&] {
    require(name && out, "name and out must not be NULL");
    *out = to_c(parse_algorithm(name));
  });
}

const char* opsplit_termination_name(opsplit_termination t) {
  switch (t) {
    case OPSPLIT_CONVERGED: return "converged";
    case OPSPLIT_MAX_ITER: return "max_iter";
    case OPSPLIT_DIVERGED: return "diverged";
  }
  return "unknown";
}

opsplit_status opsplit_max_gamma(opsplit_algorithm alg, double beta, double lipschitz,
                                 double lambda, double* out) {
  return guard([&] {
    require(out != nullptr, "out must not be NULL");
    const Algorithm a = to_cpp(alg);
    *out = max_gamma(a, beta, lipschitz,
                     needs_lambda(a) ? std::optional<double>(lambda) : std::nullopt);
  });
}

opsplit_status opsplit_problem_minkowski(const opsplit_set* sets, size_t nsets, const double* f,
                                         size_t fdim, const double* weights,
                                         opsplit_problem** out) {
  return guard([&] {
    require(out != nullptr, "out must not be NULL");
    *out = nullptr;
    require(fdim > 0, "f must be nonempty");
    auto p = std::make_unique<opsplit_problem>();
    p->minkowski = MinkowskiSpec{to_sets(sets, nsets), copy_array(f, fdim, "f")};
    p->weights = to_weights(weights, nsets);
    build_minkowski(*p->minkowski, p->weights);  // validates
    *out = p.release();
  });
}

opsplit_status opsplit_problem_synthetic(size_t dim, const opsplit_set* sets, size_t nsets,
                                         const double* skew, const double* f,
                                         const double* weights, opsplit_problem** out) {
  return guard([&] {
    require(out != nullptr, "out must not be NULL");
    *out = nullptr;
    require(dim > 0, "dimension must be positive");
    auto p = std::make_unique<opsplit_problem>();
    SyntheticSpec spec;
    spec.dim = dim;
    spec.sets = to_sets(sets, nsets);
    if (skew) spec.skew.assign(skew, skew + dim * dim);
    spec.f = copy_array(f, dim, "f");
    build_synthetic_m(spec, to_weights(weights, nsets));  // validates
    p->synthetic = std::move(spec);
    p->weights = to_weights(weights, nsets);
    *out = p.release();
  });
}

opsplit_status opsplit_problem_random_synthetic(size_t dim, size_t nsets, uint64_t seed,
                                                opsplit_problem** out) {
  return guard([&] {
    require(out != nullptr, "out must not be NULL");
    *out = nullptr;
    std::mt19937_64 rng(seed);
    auto p = std::make_unique<opsplit_problem>();
    p->synthetic = random_synthetic(dim, nsets, rng);
    *out = p.release();
  });
}

size_t opsplit_problem_dimension(const opsplit_problem* problem) {
  return problem ? iterate_dim(*problem) : 0;
}

void opsplit_problem_free(opsplit_problem* problem) { delete problem; }

opsplit_status opsplit_oracle_solve(const opsplit_problem* problem, double* x, size_t len) {
  return guard([&] {
    require(problem && x, "problem and x must not be NULL");
    require(problem->synthetic.has_value(), "the oracle only handles synthetic problems");
    require(len == problem->synthetic->dim, "output length must equal the problem dimension");
    const OracleSolution sol = oracle_solve(*problem->synthetic);
    std::copy(sol.x.begin(), sol.x.end(), x);
  });
}

opsplit_status opsplit_verify_solution(const opsplit_problem* problem, const double* x,
                                       size_t len, double tol, int* ok) {
  return guard([&] {
    require(problem && x && ok, "arguments must not be NULL");
    require(len == iterate_dim(*problem), "length must equal the problem dimension");
    const Vector v(x, x + len);
    if (problem->minkowski) {
      *ok = verify_solution(build_minkowski(*problem->minkowski, problem->weights), v, tol) ? 1 : 0;
    } else {
      *ok = verify_solution(build_synthetic_m(*problem->synthetic, problem->weights), v, tol) ? 1
                                                                                              : 0;
    }
  });
}

void opsplit_solve_params_init(opsplit_solve_params* params) {
  if (!params) return;
  *params = opsplit_solve_params{};
  params->algorithm = OPSPLIT_BSFRB;
  params->gamma = 0.0;
  params->lambda = nan();
  params->mode = OPSPLIT_MODE_STRICT;
  params->stop_known_solution = 0;
  params->target = nullptr;
  params->target_len = 0;
  params->target_offset = 0;
  params->epsilon = 1e-6;
  params->max_iter = 1000;
  params->lyapunov = 0;
  params->anchor_tolerance = 1e-12;
}

opsplit_status opsplit_solve(const opsplit_problem* problem, const opsplit_solve_params* params,
                             opsplit_trace** out) {
  return guard([&] {
    require(problem && params && out, "arguments must not be NULL");
    *out = nullptr;
    const Algorithm alg = to_cpp(params->algorithm);
    SolverParams sp{alg, params->gamma,
                    needs_lambda(alg) ? std::optional<double>(params->lambda) : std::nullopt,
                    to_cpp(params->mode)};
    if (sp.lambda && std::isnan(*sp.lambda)) throw InvalidParameter("lambda required for sfrdr");
    RunOptions opt;
    opt.max_iter = params->max_iter;
    opt.keep_iterates = false;
    opt.stop = params->stop_known_solution
                   ? StoppingRule::known_solution(
                         copy_array(params->target, params->target_len, "target"),
                         params->epsilon, params->target_offset)
                   : StoppingRule::fixed_point(params->epsilon);
    const std::size_t budget = std::max<std::size_t>(200000, 50 * params->max_iter);
    auto t = std::make_unique<opsplit_trace>();
    if (is_multi(alg)) {
      const MOperatorProblem p =
          problem->minkowski ? build_minkowski(*problem->minkowski, problem->weights)
                             : build_synthetic_m(*problem->synthetic, problem->weights);
      if (params->lyapunov) opt.anchor = presolve_anchor_m(p, sp, params->anchor_tolerance, budget);
      t->trace = run_m(p, sp, InitialState{}, opt);
    } else {
      require(problem->synthetic.has_value(),
              "four-operator algorithms need a synthetic problem with two sets");
      const FourOperatorProblem p = build_synthetic(*problem->synthetic);
      if (params->lyapunov) opt.anchor = presolve_anchor(p, sp, params->anchor_tolerance, budget);
      t->trace = run(p, sp, InitialState{}, opt);
    }
    *out = t.release();
  });
}

opsplit_termination opsplit_trace_termination(const opsplit_trace* trace) {
  return trace ? to_c(trace->trace.termination) : OPSPLIT_DIVERGED;
}

size_t opsplit_trace_iterations(const opsplit_trace* trace) {
  return trace ? trace->trace.iterations : 0;
}

size_t opsplit_trace_record_count(const opsplit_trace* trace) {
  return trace ? trace->trace.records.size() : 0;
}

opsplit_status opsplit_trace_record(const opsplit_trace* trace, size_t index, double* residual,
                                    double* distance, double* lyapunov) {
  return guard([&] {
    require(trace != nullptr, "trace must not be NULL");
    require(index < trace->trace.records.size(), "record index out of range");
    const IterationRecord& r = trace->trace.records[index];
    if (residual) *residual = r.residual;
    if (distance) *distance = r.distance.value_or(nan());
    if (lyapunov) *lyapunov = r.lyapunov.value_or(nan());
  });
}

size_t opsplit_trace_solution_length(const opsplit_trace* trace) {
  return trace ? trace->trace.solution().size() : 0;
}

opsplit_status opsplit_trace_solution(const opsplit_trace* trace, double* x, size_t len) {
  return guard([&] {
    require(trace && x, "arguments must not be NULL");
    const Vector& s = trace->trace.solution();
    require(len == s.size(), "length must equal opsplit_trace_solution_length");
    std::copy(s.begin(), s.end(), x);
  });
}

double opsplit_trace_seconds(const opsplit_trace* trace) {
  return trace ? trace->trace.wall_seconds : 0.0;
}

const char* opsplit_trace_csv(opsplit_trace* trace) {
  if (!trace) return "";
  trace->csv = trace_csv(trace->trace);
  return trace->csv.c_str();
}

void opsplit_trace_free(opsplit_trace* trace) { delete trace; }

opsplit_status opsplit_config_load(const char* path, opsplit_mode mode, opsplit_config** out) {
  return guard([&] {
    require(path && out, "path and out must not be NULL");
    *out = nullptr;
    std::optional<StepsizeMode> override;
    if (mode != OPSPLIT_MODE_FROM_CONFIG) override = to_cpp(mode);
    auto c = std::make_unique<opsplit_config>();
    c->config = parse_config(path, override);
    *out = c.release();
  });
}

opsplit_status opsplit_config_set_lyapunov(opsplit_config* config, int enabled) {
  return guard([&] {
    require(config != nullptr, "config must not be NULL");
    config->config.lyapunov = enabled != 0;
  });
}

opsplit_status opsplit_config_set_output_dir(opsplit_config* config, const char* dir) {
  return guard([&] {
    require(config != nullptr, "config must not be NULL");
    config->config.output_dir = dir ? dir : "";
  });
}

const char* opsplit_config_output_dir(const opsplit_config* config) {
  return config ? config->config.output_dir.c_str() : "";
}

void opsplit_config_free(opsplit_config* config) { delete config; }

opsplit_status opsplit_run_table(const opsplit_config* config, opsplit_table** out) {
  return guard([&] {
    require(config && out, "config and out must not be NULL");
    *out = nullptr;
    auto t = std::make_unique<opsplit_table>();
    t->result = run_table(config->config);
    *out = t.release();
  });
}

size_t opsplit_table_row_count(const opsplit_table* table) {
  return table ? table->result.rows.size() : 0;
}

opsplit_status opsplit_table_row(const opsplit_table* table, size_t index, opsplit_row* row) {
  return guard([&] {
    require(table && row, "arguments must not be NULL");
    require(index < table->result.rows.size(), "row index out of range");
    const SummaryRow& r = table->result.rows[index];
    row->case_index = r.case_index;
    row->gamma = r.gamma;
    row->lambda = r.lambda.value_or(nan());
    row->iterations = r.iterations;
    row->seconds = r.seconds;
    row->residual = r.residual;
    row->distance = r.distance.value_or(nan());
    row->termination = to_c(r.termination);
  });
}

int opsplit_table_all_converged(const opsplit_table* table) {
  return table && table->result.all_converged() ? 1 : 0;
}

size_t opsplit_table_warning_count(const opsplit_table* table) {
  return table ? table->result.warnings.size() : 0;
}

const char* opsplit_table_warning(const opsplit_table* table, size_t index) {
  if (!table || index >= table->result.warnings.size()) return "";
  return table->result.warnings[index].c_str();
}

const char* opsplit_table_text(opsplit_table* table) {
  if (!table) return "";
  table->text = format_table(table->result);
  return table->text.c_str();
}

opsplit_status opsplit_table_write(const opsplit_table* table, const char* dir) {
  return guard([&] {
    require(table && dir && *dir, "table and a nonempty dir are required");
    write_outputs(table->result, dir);
  });
}

void opsplit_table_free(opsplit_table* table) { delete table; }

}  // extern "C"
