#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "opsplit/config.hpp"

namespace opsplit {

namespace {

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

InitialState make_init(const RunConfig& cfg, std::size_t lifted_len, std::size_t base_len) {
  switch (cfg.init.kind) {
    case InitConfig::Kind::zeros: return {};
    case InitConfig::Kind::given: return cfg.init.given;
    case InitConfig::Kind::random: {
      // Same seed for every run of a sweep, so cells differ only in parameters.
      std::mt19937_64 rng(cfg.seed);
      InitialState s;
      if (base_algorithm(cfg.algorithm) == Algorithm::sfrdr) {
        s.x0 = random_vector(base_len, rng);
        s.u0 = random_vector(lifted_len, rng);
      } else {
        s.z0 = random_vector(lifted_len, rng);
        s.y0 = random_vector(lifted_len, rng);
      }
      return s;
    }
  }
  return {};
}

std::string trace_name(const RunConfig& cfg, std::size_t index, double gamma,
                       std::optional<double> lambda) {
  std::string name = "trace_" + std::to_string(index) + "_" + to_string(cfg.algorithm) + "_g" +
                     format_shortest(gamma);
  if (lambda) name += "_l" + format_shortest(*lambda);
  return name + ".csv";
}

std::string format_vector(const Vector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_shortest(v[i]);
  return s + ")";
}

}  // namespace

bool TableResult::all_converged() const {
  for (const auto& r : rows) {
    if (r.termination != Termination::converged) return false;
  }
  return true;
}

TableResult run_table(const RunConfig& cfg) {
  validate_config(cfg);
  const ProblemConfig& pc = cfg.problem;
  TableResult table;
  table.algorithm = cfg.algorithm;
  const bool multi = is_multi(cfg.algorithm);
  std::optional<WeightVector> weights;
  if (cfg.weights) weights = WeightVector(*cfg.weights);

  const std::vector<std::optional<double>> lambdas = [&] {
    std::vector<std::optional<double>> out;
    if (cfg.lambdas.empty()) out.push_back(std::nullopt);
    for (double l : cfg.lambdas) out.push_back(l);
    return out;
  }();

  std::size_t index = 0;
  for (std::size_t ci = 0; ci < pc.cases.size(); ++ci) {
    const TargetCase& tc = pc.cases[ci];
    std::optional<MOperatorProblem> mp;
    std::optional<FourOperatorProblem> fp;
    std::optional<Vector> solution = tc.solution;
    if (pc.kind == ProblemConfig::Kind::minkowski) {
      mp.emplace(build_minkowski(MinkowskiSpec{pc.sets, tc.f}, weights));
    } else {
      SyntheticSpec spec{pc.dim, pc.sets, pc.skew, tc.f};
      if (multi) {
        mp.emplace(build_synthetic_m(spec, weights));
      } else {
        fp.emplace(build_synthetic(spec));
      }
      if (!solution && cfg.stop_rule == StoppingRule::Kind::known_solution) {
        solution = oracle_solve(spec).x;
      }
    }
    const std::size_t base_len = multi ? mp->dim : fp->dim;
    const std::size_t lifted_len = multi ? mp->dim * mp->m() : fp->dim;

    for (double gamma : cfg.gammas) {
      for (const auto& lambda : lambdas) {
        SolverParams params{cfg.algorithm, gamma, lambda, cfg.mode};
        RunOptions opt;
        opt.max_iter = cfg.max_iter;
        opt.keep_iterates = false;
        opt.stop = cfg.stop_rule == StoppingRule::Kind::known_solution
                       ? StoppingRule::known_solution(*solution, cfg.epsilon, 0)
                       : StoppingRule::fixed_point(cfg.epsilon);
        if (cfg.lyapunov) {
          const std::size_t budget = std::max<std::size_t>(200000, 50 * cfg.max_iter);
          try {
            opt.anchor = multi ? presolve_anchor_m(*mp, params, cfg.anchor_tolerance, budget)
                               : presolve_anchor(*fp, params, cfg.anchor_tolerance, budget);
          } catch (const SolverError& e) {
            table.warnings.push_back("run " + std::to_string(index) +
                                     ": no Lyapunov column (" + e.what() + ")");
          }
        }
        const InitialState init = make_init(cfg, lifted_len, base_len);

        SummaryRow row;
        row.case_index = ci;
        row.f = tc.f;
        row.gamma = gamma;
        row.lambda = lambda;
        row.trace_name = trace_name(cfg, index, gamma, lambda);
        RunTrace trace;
        try {
          trace = multi ? run_m(*mp, params, init, opt) : run(*fp, params, init, opt);
        } catch (const SolverError& e) {
          // An operator failure mid-run is reported as a diverged row.
          trace.termination = Termination::diverged;
          trace.iterations = e.iteration();
          trace.warnings.push_back(e.what());
        }
        row.iterations = trace.iterations;
        row.seconds = trace.wall_seconds;
        row.residual = trace.final_residual();
        if (!trace.records.empty()) row.distance = trace.records.back().distance;
        row.termination = trace.termination;
        for (const auto& w : trace.warnings) {
          table.warnings.push_back("run " + std::to_string(index) + ": " + w);
        }
        table.rows.push_back(std::move(row));
        table.traces.push_back(std::move(trace));
        ++index;
      }
    }
  }
  return table;
}

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const RunTrace& trace) {
  std::string out = "n,residual,dist_to_solution,lyapunov\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.n);
    out += ',';
    out += format_shortest(r.residual);
    out += ',';
    if (r.distance) out += format_shortest(*r.distance);
    out += ',';
    if (r.lyapunov) out += format_shortest(*r.lyapunov);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const TableResult& table) {
  std::string out =
      "algorithm,case,f,gamma,lambda,iterations,final_residual,final_distance,termination,trace\n";
  for (const auto& r : table.rows) {
    out += to_string(table.algorithm);
    out += ',' + std::to_string(r.case_index);
    out += ",\"" + format_vector(r.f) + "\"";
    out += ',' + format_shortest(r.gamma);
    out += ',' + (r.lambda ? format_shortest(*r.lambda) : std::string());
    out += ',' + std::to_string(r.iterations);
    out += ',' + format_shortest(r.residual);
    out += ',' + (r.distance ? format_shortest(*r.distance) : std::string());
    out += ',' + std::string(to_string(r.termination));
    out += ',' + r.trace_name + '\n';
  }
  return out;
}

std::string format_table(const TableResult& table) {
  std::ostringstream os;
  const bool with_lambda = !table.rows.empty() && table.rows.front().lambda.has_value();
  os << std::left << std::setw(14) << "f" << std::right << std::setw(9) << "gamma";
  if (with_lambda) os << std::setw(9) << "lambda";
  os << std::setw(9) << "Iter" << std::setw(11) << "Time(s)" << std::setw(14) << "residual"
     << "  status\n";
  for (const auto& r : table.rows) {
    os << std::left << std::setw(14) << format_vector(r.f) << std::right << std::setw(9)
       << format_shortest(r.gamma);
    if (with_lambda) os << std::setw(9) << (r.lambda ? format_shortest(*r.lambda) : "");
    std::ostringstream t;
    t << std::fixed << std::setprecision(4) << r.seconds;
    std::ostringstream res;
    res << std::scientific << std::setprecision(3) << r.residual;
    os << std::setw(9) << r.iterations << std::setw(11) << t.str() << std::setw(14) << res.str()
       << "  " << to_string(r.termination) << '\n';
  }
  return os.str();
}

void write_outputs(const TableResult& table, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir + ": cannot create directory (" + ec.message() + ")");
  auto write = [](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << content;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
  };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    write(fs::path(dir) / table.rows[i].trace_name, trace_csv(table.traces[i]));
  }
  write(fs::path(dir) / "summary.csv", summary_csv(table));
}

}  // namespace opsplit
