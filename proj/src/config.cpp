#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "opsplit/config.hpp"

namespace opsplit {

namespace {

using json = nlohmann::json;

// Walks a JSON tree while remembering the key path for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(path_.empty() ? msg : "key '" + path_ + "': " + msg);
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_.contains(key); }

  Node at(const std::string& key) const {
    if (!j_.contains(key)) fail("missing required key '" + key + "'");
    return Node(j_.at(key), child(key));
  }

  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, _] : j_.items()) {
      if (!ok.count(k)) {
        std::string list;
        for (const auto& a : ok) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError("key '" + child(k) + "': unknown key (allowed: " + list + ")");
      }
    }
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  std::size_t count() const {
    if (!j_.is_number_integer() || j_.get<long long>() < 0) fail("expected a nonnegative integer");
    return j_.get<std::size_t>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  Vector vector() const {
    if (!j_.is_array() || j_.empty()) fail("expected a nonempty array of numbers");
    Vector v;
    for (std::size_t i = 0; i < j_.size(); ++i) v.push_back(at(i).number());
    return v;
  }

  /// A scalar or a nonempty list of scalars.
  std::vector<double> sweep() const {
    if (j_.is_number()) return {positive()};
    if (!j_.is_array()) fail("expected a number or a list of numbers");
    if (j_.empty()) fail("sweep list must not be empty");
    std::vector<double> v;
    for (std::size_t i = 0; i < j_.size(); ++i) v.push_back(at(i).positive());
    return v;
  }

 private:
  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
};

ConvexSet parse_set(const Node& n) {
  if (!n.raw().is_object()) n.fail("expected a set object");
  const std::string kind = n.at("kind").string();
  try {
    if (kind == "segment") {
      n.require_object({"kind", "dim", "axis", "lo", "hi"});
      const std::size_t dim = n.has("dim") ? n.at("dim").count() : 2;
      return ConvexSet::segment(dim, n.at("axis").count(), n.at("lo").number(),
                                n.at("hi").number());
    }
    if (kind == "box") {
      n.require_object({"kind", "lower", "upper"});
      return ConvexSet::box(n.at("lower").vector(), n.at("upper").vector());
    }
    if (kind == "ball") {
      n.require_object({"kind", "center", "radius"});
      return ConvexSet::ball(n.at("center").vector(), n.at("radius").number());
    }
    if (kind == "singleton") {
      n.require_object({"kind", "point"});
      return ConvexSet::singleton(n.at("point").vector());
    }
    if (kind == "whole_space") {
      n.require_object({"kind", "dim"});
      return ConvexSet::whole_space(n.at("dim").count());
    }
  } catch (const std::invalid_argument& e) {
    n.fail(e.what());
  }
  n.at("kind").fail("unknown set kind '" + kind +
                    "' (expected segment, box, ball, singleton or whole_space)");
}

std::vector<ConvexSet> parse_sets(const Node& n) {
  if (n.raw().is_string()) {
    if (n.string() == "standard") return standard_minkowski_sets();
    n.fail("the only named set list is \"standard\"");
  }
  if (!n.raw().is_array() || n.raw().empty()) n.fail("expected a nonempty list of sets");
  std::vector<ConvexSet> sets;
  for (std::size_t i = 0; i < n.raw().size(); ++i) sets.push_back(parse_set(n.at(i)));
  return sets;
}

std::vector<TargetCase> parse_cases(const Node& n) {
  if (!n.raw().is_array() || n.raw().empty()) n.fail("expected a nonempty list of cases");
  std::vector<TargetCase> cases;
  for (std::size_t i = 0; i < n.raw().size(); ++i) {
    const Node c = n.at(i);
    c.require_object({"f", "solution"});
    TargetCase t{c.at("f").vector(), std::nullopt};
    if (c.has("solution")) {
      t.solution = c.at("solution").vector();
      if (t.solution->size() != t.f.size()) c.at("solution").fail("must have the length of f");
    }
    cases.push_back(std::move(t));
  }
  return cases;
}

ProblemConfig parse_problem(const Node& n) {
  n.require_object({"type", "sets", "cases", "dim", "skew"});
  ProblemConfig p;
  const std::string type = n.at("type").string();
  if (type == "minkowski") {
    p.kind = ProblemConfig::Kind::minkowski;
    if (n.has("dim") || n.has("skew")) n.fail("'dim' and 'skew' apply to synthetic problems only");
    p.sets = parse_sets(n.at("sets"));
    p.cases = parse_cases(n.at("cases"));
    p.dim = p.cases.front().f.size();
  } else if (type == "synthetic") {
    p.kind = ProblemConfig::Kind::synthetic;
    p.dim = n.at("dim").count();
    if (p.dim == 0) n.at("dim").fail("must be positive");
    p.sets = parse_sets(n.at("sets"));
    p.cases = parse_cases(n.at("cases"));
    if (n.has("skew")) {
      const Node s = n.at("skew");
      if (!s.raw().is_array() || s.raw().size() != p.dim) s.fail("expected dim rows");
      for (std::size_t i = 0; i < p.dim; ++i) {
        const Vector row = s.at(i).vector();
        if (row.size() != p.dim) s.at(i).fail("expected dim entries");
        p.skew.insert(p.skew.end(), row.begin(), row.end());
      }
      for (std::size_t i = 0; i < p.dim; ++i) {
        for (std::size_t j = 0; j < p.dim; ++j) {
          if (p.skew[i * p.dim + j] != -p.skew[j * p.dim + i]) s.fail("matrix must be skew-symmetric");
        }
      }
    }
  } else {
    n.at("type").fail("expected \"minkowski\" or \"synthetic\"");
  }
  for (std::size_t i = 0; i < p.cases.size(); ++i) {
    if (p.cases[i].f.size() != p.dim) {
      n.at("cases").at(i).fail("f must have length " + std::to_string(p.dim));
    }
  }
  for (std::size_t i = 0; i < p.sets.size(); ++i) {
    if (p.sets[i].dimension() != p.dim) {
      n.at("sets").fail("set " + std::to_string(i) + " has dimension " +
                        std::to_string(p.sets[i].dimension()) + ", expected " +
                        std::to_string(p.dim));
    }
  }
  return p;
}

InitConfig parse_init(const Node& n) {
  InitConfig init;
  if (n.raw().is_string()) {
    const std::string s = n.string();
    if (s == "zeros") return init;
    if (s == "random") {
      init.kind = InitConfig::Kind::random;
      return init;
    }
    n.fail("expected \"zeros\", \"random\" or an object of vectors");
  }
  n.require_object({"z0", "y0", "y_prev", "x0", "u0", "x_prev"});
  init.kind = InitConfig::Kind::given;
  auto opt = [&](const char* key, Vector& out) {
    if (n.has(key)) out = n.at(key).vector();
  };
  opt("z0", init.given.z0);
  opt("y0", init.given.y0);
  opt("y_prev", init.given.y_prev);
  opt("x0", init.given.x0);
  opt("u0", init.given.u0);
  opt("x_prev", init.given.x_prev);
  return init;
}

RunConfig parse_root(const json& j, std::optional<StepsizeMode> mode_override) {
  const Node root(j, "");
  root.require_object({"problem", "algorithm", "gamma", "lambda", "weights", "init", "stop",
                       "max_iter", "stepsize_mode", "output", "lyapunov", "seed"});
  RunConfig cfg;
  cfg.problem = parse_problem(root.at("problem"));
  try {
    cfg.algorithm = parse_algorithm(root.at("algorithm").string());
  } catch (const InvalidArgument& e) {
    root.at("algorithm").fail(e.what());
  }
  cfg.gammas = root.at("gamma").sweep();
  if (needs_lambda(cfg.algorithm)) {
    if (!root.has("lambda")) root.fail(std::string("lambda required for ") + to_string(cfg.algorithm));
    cfg.lambdas = root.at("lambda").sweep();
  } else if (root.has("lambda")) {
    root.at("lambda").fail(std::string("lambda does not apply to ") + to_string(cfg.algorithm));
  }
  if (root.has("weights")) cfg.weights = root.at("weights").vector();
  if (root.has("init")) cfg.init = parse_init(root.at("init"));
  if (root.has("stop")) {
    const Node s = root.at("stop");
    s.require_object({"rule", "epsilon"});
    const std::string rule = s.at("rule").string();
    if (rule == "known_solution") {
      cfg.stop_rule = StoppingRule::Kind::known_solution;
    } else if (rule == "fixed_point") {
      cfg.stop_rule = StoppingRule::Kind::fixed_point;
    } else {
      s.at("rule").fail("expected \"known_solution\" or \"fixed_point\"");
    }
    if (s.has("epsilon")) cfg.epsilon = s.at("epsilon").positive();
  }
  if (root.has("max_iter")) {
    cfg.max_iter = root.at("max_iter").count();
    if (cfg.max_iter == 0) root.at("max_iter").fail("must be at least 1");
  }
  if (root.has("stepsize_mode")) {
    const std::string m = root.at("stepsize_mode").string();
    if (m == "strict") {
      cfg.mode = StepsizeMode::strict;
    } else if (m == "permissive") {
      cfg.mode = StepsizeMode::permissive;
    } else {
      root.at("stepsize_mode").fail("expected \"strict\" or \"permissive\"");
    }
  }
  if (mode_override) cfg.mode = *mode_override;
  if (root.has("output")) {
    const Node o = root.at("output");
    o.require_object({"dir"});
    if (o.has("dir")) cfg.output_dir = o.at("dir").string();
  }
  if (root.has("lyapunov")) cfg.lyapunov = root.at("lyapunov").boolean();
  if (root.has("seed")) cfg.seed = root.at("seed").count();
  validate_config(cfg);
  return cfg;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  const bool multi = is_multi(cfg.algorithm);
  if (p.kind == ProblemConfig::Kind::minkowski && !multi) {
    throw ConfigError("key 'algorithm': minkowski problems need an m-operator method "
                      "(m-bsfrb, m-bsrfb or m-sfrdr)");
  }
  if (p.kind == ProblemConfig::Kind::synthetic && !multi && p.sets.size() != 2) {
    throw ConfigError("key 'problem.sets': four-operator methods need exactly two sets");
  }
  std::size_t m = multi ? p.sets.size() : 1;
  if (cfg.weights) {
    if (!multi) throw ConfigError("key 'weights': only m-operator methods take weights");
    if (cfg.weights->size() != m) {
      throw ConfigError("key 'weights': expected " + std::to_string(m) + " weights");
    }
    try {
      WeightVector w(*cfg.weights);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'weights': ") + e.what());
    }
  }
  if (cfg.stop_rule == StoppingRule::Kind::known_solution &&
      p.kind == ProblemConfig::Kind::minkowski) {
    for (std::size_t i = 0; i < p.cases.size(); ++i) {
      if (!p.cases[i].solution) {
        throw ConfigError("key 'problem.cases[" + std::to_string(i) +
                          "].solution': required by the known_solution stopping rule");
      }
    }
  }
  // Constants of the problem family: C is 1-cocoercive, B is the skew pair
  // (L = 1) or the configured skew matrix (Frobenius norm).
  double lip = 1.0;
  if (p.kind == ProblemConfig::Kind::synthetic) {
    double fro = 0.0;
    for (double s : p.skew) fro += s * s;
    lip = std::sqrt(fro);
  }
  for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
    const std::vector<double> lambdas =
        cfg.lambdas.empty() ? std::vector<double>{0.0} : cfg.lambdas;
    for (double lam : lambdas) {
      try {
        check_stepsize(cfg.algorithm, cfg.gammas[gi],
                       cfg.lambdas.empty() ? std::nullopt : std::optional<double>(lam), 1.0, lip,
                       cfg.mode);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("key 'gamma[" + std::to_string(gi) + "]': " + e.what());
      }
    }
  }
}

RunConfig parse_config_text(const std::string& text, const std::string& source,
                            std::optional<StepsizeMode> mode_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_of(text, e.byte)) +
                      ": JSON syntax error: " + e.what());
  }
  try {
    return parse_root(j, mode_override);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

RunConfig parse_config(const std::string& path, std::optional<StepsizeMode> mode_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, mode_override);
}

}  // namespace opsplit
