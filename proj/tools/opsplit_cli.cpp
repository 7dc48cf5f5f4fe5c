// Command-line front end. Talks to the solver only through the C interface.
#include <cmath>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "opsplit/opsplit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

int report(opsplit_status s) {
  std::fprintf(stderr, "error (%s): %s\n", opsplit_status_string(s), opsplit_last_error());
  return kExitError;
}

int run_command(const std::string& path, const std::string& out_dir, bool strict,
                bool permissive, bool lyapunov) {
  opsplit_mode mode = OPSPLIT_MODE_FROM_CONFIG;
  if (strict) mode = OPSPLIT_MODE_STRICT;
  if (permissive) mode = OPSPLIT_MODE_PERMISSIVE;

  opsplit_config* cfg = nullptr;
  if (opsplit_status s = opsplit_config_load(path.c_str(), mode, &cfg); s != OPSPLIT_OK) {
    return report(s);
  }
  if (!out_dir.empty()) opsplit_config_set_output_dir(cfg, out_dir.c_str());
  if (lyapunov) opsplit_config_set_lyapunov(cfg, 1);

  opsplit_table* table = nullptr;
  if (opsplit_status s = opsplit_run_table(cfg, &table); s != OPSPLIT_OK) {
    opsplit_config_free(cfg);
    return report(s);
  }
  std::fputs(opsplit_table_text(table), stdout);
  for (size_t i = 0; i < opsplit_table_warning_count(table); ++i) {
    std::fprintf(stderr, "warning: %s\n", opsplit_table_warning(table, i));
  }

  int code = opsplit_table_all_converged(table) ? kExitOk : kExitNotConverged;
  const std::string dir = opsplit_config_output_dir(cfg);
  if (!dir.empty()) {
    if (opsplit_status s = opsplit_table_write(table, dir.c_str()); s != OPSPLIT_OK) {
      code = report(s);
    } else {
      std::printf("wrote %zu traces and summary.csv to %s\n", opsplit_table_row_count(table),
                  dir.c_str());
    }
  }
  opsplit_table_free(table);
  opsplit_config_free(cfg);
  return code;
}

int bound_command(const std::string& name, double beta, double lipschitz, double lambda) {
  opsplit_algorithm alg;
  if (opsplit_status s = opsplit_algorithm_from_name(name.c_str(), &alg); s != OPSPLIT_OK) {
    return report(s);
  }
  double g = 0.0;
  if (opsplit_status s = opsplit_max_gamma(alg, beta, lipschitz, lambda, &g); s != OPSPLIT_OK) {
    return report(s);
  }
  std::printf("%s: gamma < %.17g\n", opsplit_algorithm_name(alg), g);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-reflected splitting solvers for monotone inclusions"};
  app.set_version_flag("--version", std::string(opsplit_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool strict = false, permissive = false, lyapunov = false;
  auto* run = app.add_subcommand("run", "Run every (f, gamma[, lambda]) cell of a config");
  run->add_option("config", config_path, "JSON run configuration")->required()->check(
      CLI::ExistingFile);
  run->add_option("--out", out_dir, "Directory for summary.csv and trace CSVs");
  auto* s_flag = run->add_flag("--strict", strict, "Reject stepsizes above the bound");
  run->add_flag("--permissive", permissive, "Warn instead of rejecting")->excludes(s_flag);
  run->add_flag("--lyapunov", lyapunov, "Record the Lyapunov value of every iterate");

  std::string alg_name;
  double beta = INFINITY, lipschitz = 0.0, lambda = NAN;
  auto* bound = app.add_subcommand("bound", "Print the stepsize bound of an algorithm");
  bound->add_option("algorithm", alg_name, "bsfrb, bsrfb, sfrdr or an m- variant")->required();
  bound->add_option("--beta", beta, "Cocoercivity constant of C (default: C = 0)");
  bound->add_option("--lipschitz,-L", lipschitz, "Lipschitz constant of B (default: B = 0)");
  bound->add_option("--lambda", lambda, "Second stepsize (sfrdr family)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*run) return run_command(config_path, out_dir, strict, permissive, lyapunov);
  return bound_command(alg_name, beta, lipschitz, lambda);
}
