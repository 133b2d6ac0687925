#include "p2d2/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "p2d2/analysis.hpp"
#include "p2d2/error.hpp"
#include "p2d2/random.hpp"

namespace p2d2::cli {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::InvalidConfig, "field '" + field + "': " + msg);
}

// Typed access to one JSON object with field-qualified error messages.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : node_.items())
      if (!allowed.count(key)) config_error(field(key), "unknown key");
  }

  bool has(const char* key) const { return node_.contains(key); }
  const json& raw(const char* key) const { return node_.at(key); }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  Section child(const char* key) const {
    if (!has(key)) config_error(field(key), "missing");
    return Section(node_.at(key), field(key));
  }

  double number(const char* key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      config_error(field(key), "missing");
    }
    const auto& v = node_.at(key);
    if (!v.is_number()) config_error(field(key), "expected a number");
    return v.get<double>();
  }

  long long integer(const char* key, std::optional<long long> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      config_error(field(key), "missing");
    }
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) config_error(field(key), "expected an integer");
    return v.get<long long>();
  }

  std::string text(const char* key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      config_error(field(key), "missing");
    }
    const auto& v = node_.at(key);
    if (!v.is_string()) config_error(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) config_error(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const char* key) const {
    if (!has(key)) return {};
    const auto& v = node_.at(key);
    if (!v.is_array()) config_error(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) config_error(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

 private:
  const json& node_;
  std::string path_;
};

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

GraphSpec parse_graph(const Section& s) {
  s.allow_only({"type", "K", "p", "seed", "edges"});
  GraphSpec g;
  g.type = s.text("type");
  const long long k = s.integer("K");
  if (k < 1 || k > 100000) config_error(s.field("K"), "must be a positive agent count");
  g.num_agents = static_cast<int>(k);
  if (g.type == "random") {
    g.edge_prob = s.number("p");
    if (!(g.edge_prob > 0.0 && g.edge_prob <= 1.0)) config_error(s.field("p"), "must lie in (0, 1]");
    if (g.num_agents < 2) config_error(s.field("K"), "random graphs need K >= 2");
    if (s.has("seed")) g.seed = static_cast<std::uint64_t>(s.integer("seed"));
  } else if (g.type == "edges") {
    const auto& e = s.raw("edges");
    if (!e.is_array()) config_error(s.field("edges"), "expected [[s, k], ...]");
    for (const auto& pair : e) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer())
        config_error(s.field("edges"), "expected [[s, k], ...]");
      g.edges.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  } else if (g.type != "path" && g.type != "ring" && g.type != "complete") {
    config_error(s.field("type"), "unknown graph type '" + g.type + "' (random|path|ring|complete|edges)");
  }
  return g;
}

DataSpec parse_data(const Section& s, const std::string& base_dir) {
  DataSpec d;
  d.type = s.text("type");
  if (d.type == "synthetic") {
    s.allow_only({"type", "samples_per_agent", "dim", "sparsity", "noise"});
    d.samples_per_agent = static_cast<int>(s.integer("samples_per_agent", 100));
    d.dim = static_cast<int>(s.integer("dim", 50));
    d.sparsity = s.number("sparsity", 0.2);
    d.noise = s.number("noise", 0.05);
    if (d.samples_per_agent < 1) config_error(s.field("samples_per_agent"), "must be positive");
    if (d.dim < 1) config_error(s.field("dim"), "must be positive");
    if (!(d.sparsity > 0.0 && d.sparsity <= 1.0)) config_error(s.field("sparsity"), "must lie in (0, 1]");
    if (!(d.noise >= 0.0 && d.noise <= 0.5)) config_error(s.field("noise"), "must lie in [0, 0.5]");
  } else if (d.type == "libsvm") {
    s.allow_only({"type", "path", "normalize", "negative_labels", "keep_labels", "num_features"});
    d.path = resolve(s.text("path"), base_dir);
    d.libsvm.normalize = s.flag("normalize", true);
    d.libsvm.negative_labels = s.numbers("negative_labels");
    d.libsvm.keep_labels = s.numbers("keep_labels");
    d.libsvm.num_features = static_cast<int>(s.integer("num_features", 0));
    if (d.libsvm.num_features < 0) config_error(s.field("num_features"), "must be nonnegative");
  } else {
    config_error(s.field("type"), "unknown data type '" + d.type + "' (synthetic|libsvm)");
  }
  return d;
}

Regularizer parse_regularizer(const Section& s) {
  const std::string kind = s.text("kind");
  auto nonneg = [&](const char* key) {
    const double v = s.number(key);
    if (!(v >= 0.0)) config_error(s.field(key), "must be nonnegative");
    return v;
  };
  if (kind == "zero") {
    s.allow_only({"kind"});
    return Regularizer::zero();
  }
  if (kind == "l1") {
    s.allow_only({"kind", "rho"});
    return Regularizer::l1(nonneg("rho"));
  }
  if (kind == "elastic_net") {
    s.allow_only({"kind", "rho1", "rho2"});
    return Regularizer::elastic_net(nonneg("rho1"), nonneg("rho2"));
  }
  if (kind == "nonneg") {
    s.allow_only({"kind"});
    return Regularizer::nonneg();
  }
  config_error(s.field("kind"), "unknown regularizer '" + kind + "' (zero|l1|elastic_net|nonneg)");
}

// Shared logging: P2D2_LOG selects error|warn|info|debug (default warn).
int log_level() {
  const char* env = std::getenv("P2D2_LOG");
  const std::string v = env ? env : "warn";
  if (v == "error") return 0;
  if (v == "info") return 2;
  if (v == "debug") return 3;
  return 1;
}

void log(std::ostream& err, int level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) err << "[" << names[level] << "] " << msg << '\n';
}

int exit_code_for(const Error& e) {
  if (e.code() == ErrorCode::InvalidConfig || e.code() == ErrorCode::ParseError) return kExitConfig;
  return is_numerical(e.code()) ? kExitNumerical : kExitConfig;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    log(err, 0, e.what());
    return exit_code_for(e);
  } catch (const json::exception& e) {
    log(err, 0, std::string("config: ") + e.what());
    return kExitConfig;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Steps, constants and the certificate (when one applies) for a run.
struct ResolvedSteps {
  double mu = 0.0;
  double alpha = 0.0;
  std::optional<CostConstants> constants;
  std::optional<SpectralBounds> spectrum;
  std::optional<RateCertificate> certificate;
  std::vector<std::string> warnings;
};

ResolvedSteps resolve_steps(const RunConfig& config, const Problem& problem, bool require_certificate) {
  ResolvedSteps r;
  const bool r_is_zero = problem.regularizer.is_zero();
  const bool extra = config.form == SolverForm::Extra;
  if (config.steps.mode == "certified" || require_certificate) {
    r.constants = estimate_constants(problem.costs);
    r.spectrum = spectral_bounds(problem.topology.consensus);
  } else {
    try {
      r.constants = estimate_constants(problem.costs);
      r.spectrum = spectral_bounds(problem.topology.consensus);
    } catch (const Error& e) {
      r.warnings.push_back(std::string("no certificate: ") + e.what());
    }
  }

  if (config.steps.mode == "certified") {
    const StepSizes s = step_size_defaults(*r.constants, *r.spectrum, config.steps.safety);
    r.mu = s.mu;
    // With R = 0 any alpha <= 1 is certified; EXTRA needs alpha = 1.
    r.alpha = extra ? 1.0 : s.alpha;
    r.certificate = rate_certificate(s.mu, r.alpha, s.rho, s.c, *r.constants, *r.spectrum, r_is_zero);
    return r;
  }

  r.mu = config.steps.mu;
  r.alpha = config.steps.alpha;
  if (!r.constants) return r;
  const double mu_bound = (1.0 - r.spectrum->sigma_max) / r.constants->delta;
  if (r.mu >= mu_bound) {
    r.warnings.push_back("mu = " + fmt(r.mu) + " exceeds the certified bound (1 - sigma_max)/delta = " +
                         fmt(mu_bound) + "; running without a certificate");
    if (require_certificate)
      throw Error(ErrorCode::CertificateUnavailable, "mu < (1 - sigma_max)/delta violated");
    return r;
  }
  const double rho = max_rho(r.mu, r.constants->delta, r.spectrum->sigma_max);
  const auto opt = optimize_nu_rho(r.constants->nu, r.constants->delta, r.spectrum->sigma_under, rho);
  const auto violations =
      step_condition_violations(r.mu, r.alpha, rho, opt.c, *r.constants, *r.spectrum, r_is_zero);
  if (violations.empty()) {
    r.certificate = rate_certificate(r.mu, r.alpha, rho, opt.c, *r.constants, *r.spectrum, r_is_zero);
  } else {
    if (require_certificate) throw Error(ErrorCode::CertificateUnavailable, violations.front());
    for (const auto& v : violations) r.warnings.push_back(v + "; running without a certificate");
  }
  return r;
}

SolverConfig solver_config(const RunConfig& config, const ResolvedSteps& steps) {
  SolverConfig sc;
  sc.mu = steps.mu;
  sc.alpha = steps.alpha;
  sc.max_iters = config.max_iters;
  sc.tol = config.tol;
  sc.w0 = config.w0;
  sc.workers = config.workers;
  sc.record_timing = config.record_timing;
  return sc;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  Section s(root, "");
  s.allow_only({"seed", "graph", "combination_csv", "data", "cost", "regularizer", "solver", "steps", "output"});

  RunConfig c;
  c.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  c.graph = parse_graph(s.child("graph"));
  if (s.has("combination_csv")) c.combination_csv = resolve(s.text("combination_csv"), base_dir);

  {
    Section cost = s.child("cost");
    cost.allow_only({"kind", "lambda"});
    const std::string kind = cost.text("kind");
    if (kind == "logistic")
      c.cost_kind = CostKind::Logistic;
    else if (kind == "quadratic")
      c.cost_kind = CostKind::Quadratic;
    else
      config_error(cost.field("kind"), "unknown cost '" + kind + "' (logistic|quadratic)");
    c.l2_reg = cost.number("lambda", c.cost_kind == CostKind::Logistic ? 1e-2 : 0.0);
    if (!(c.l2_reg >= 0.0)) config_error(cost.field("lambda"), "must be nonnegative");
  }
  c.data = parse_data(s.child("data"), base_dir);
  if (c.cost_kind == CostKind::Quadratic && c.data.type != "synthetic")
    config_error("data.type", "quadratic costs only support synthetic data");

  c.regularizer = s.has("regularizer") ? parse_regularizer(s.child("regularizer")) : Regularizer::zero();

  {
    Section sol = s.child("solver");
    sol.allow_only({"form", "max_iters", "tol", "workers", "w0"});
    try {
      c.form = parse_solver_form(sol.text("form", "agent"));
    } catch (const Error& e) {
      config_error(sol.field("form"), e.what());
    }
    c.max_iters = static_cast<int>(sol.integer("max_iters", 1000));
    if (c.max_iters < 0) config_error(sol.field("max_iters"), "must be nonnegative");
    c.tol = sol.number("tol", 0.0);
    if (!(c.tol >= 0.0)) config_error(sol.field("tol"), "must be nonnegative");
    c.workers = static_cast<int>(sol.integer("workers", 1));
    if (c.workers < 1) config_error(sol.field("workers"), "must be at least 1");
    if (sol.has("w0")) {
      const auto& w0 = sol.raw("w0");
      if (w0.is_string()) {
        if (w0.get<std::string>() != "zeros") config_error(sol.field("w0"), "expected \"zeros\" or a K x M array");
      } else if (w0.is_array() && !w0.empty()) {
        const auto rows = static_cast<Eigen::Index>(w0.size());
        const auto cols = static_cast<Eigen::Index>(w0[0].is_array() ? w0[0].size() : 0);
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
          if (!w0[i].is_array() || static_cast<Eigen::Index>(w0[i].size()) != cols)
            config_error(sol.field("w0"), "rows must have equal length");
          for (Eigen::Index j = 0; j < cols; ++j) {
            if (!w0[i][j].is_number()) config_error(sol.field("w0"), "entries must be numbers");
            m(i, j) = w0[i][j].get<double>();
          }
        }
        c.w0 = std::move(m);
      } else {
        config_error(sol.field("w0"), "expected \"zeros\" or a K x M array");
      }
    }
  }

  {
    Section st = s.child("steps");
    c.steps.mode = st.text("mode");
    if (c.steps.mode == "certified") {
      st.allow_only({"mode", "safety"});
      c.steps.safety = st.number("safety", 0.5);
      if (!(c.steps.safety > 0.0 && c.steps.safety < 1.0)) config_error(st.field("safety"), "must lie in (0, 1)");
    } else if (c.steps.mode == "manual") {
      st.allow_only({"mode", "mu", "alpha"});
      c.steps.mu = st.number("mu");
      c.steps.alpha = st.number("alpha");
      if (!(c.steps.mu > 0.0)) config_error(st.field("mu"), "must be positive");
      if (!(c.steps.alpha > 0.0 && c.steps.alpha <= 1.0)) config_error(st.field("alpha"), "must lie in (0, 1]");
    } else {
      config_error(st.field("mode"), "unknown step mode '" + c.steps.mode + "' (certified|manual)");
    }
  }

  if (s.has("output")) {
    Section out = s.child("output");
    out.allow_only({"trace", "checkpoint", "timing"});
    c.trace_path = resolve(out.text("trace", ""), base_dir);
    c.checkpoint_path = resolve(out.text("checkpoint", ""), base_dir);
    c.record_timing = out.flag("timing", false);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

Problem build_problem(const RunConfig& c) {
  const GraphSpec& gs = c.graph;
  const int k = gs.num_agents;
  CombinationMatrix combination = [&] {
    if (c.combination_csv) {
      auto a = load_combination_csv(*c.combination_csv);
      if (a.num_agents() != k) config_error("combination_csv", "matrix size does not match graph.K");
      return a;
    }
    Graph graph;
    if (gs.type == "random")
      graph = random_connected_graph(k, gs.edge_prob, gs.seed.value_or(derive_seed(c.seed, "graph")));
    else if (gs.type == "path")
      graph = Graph::path(k);
    else if (gs.type == "ring")
      graph = Graph::ring(k);
    else if (gs.type == "complete")
      graph = Graph::complete(k);
    else
      graph = Graph(k, gs.edges);
    if (k == 1) return CombinationMatrix::from_matrix(Matrix::Ones(1, 1));
    return metropolis_weights(graph);
  }();

  std::vector<AgentCost> costs;
  const std::uint64_t data_seed = derive_seed(c.seed, "data");
  if (c.cost_kind == CostKind::Quadratic) {
    costs = synthesize_quadratic(k, c.data.dim, data_seed, c.l2_reg);
  } else if (c.data.type == "synthetic") {
    SyntheticLogisticParams p;
    p.num_agents = k;
    p.samples_per_agent = c.data.samples_per_agent;
    p.dim = c.data.dim;
    p.sparsity = c.data.sparsity;
    p.noise = c.data.noise;
    p.l2_reg = c.l2_reg;
    p.seed = data_seed;
    costs = synthesize_logistic(p).costs;
  } else {
    const Dataset data = read_libsvm(c.data.path, c.data.libsvm);
    costs = partition(data, k, derive_seed(c.seed, "partition"), c.l2_reg);
  }
  return Problem(std::move(costs), c.regularizer, Topology(std::move(combination)));
}

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_config(config_path);
    const Problem problem = build_problem(config);
    const ResolvedSteps steps = resolve_steps(config, problem, false);
    for (const auto& w : steps.warnings) log(err, 1, w);
    const SolverConfig sc = solver_config(config, steps);
    sc.validate();

    const IstaResult optimum = ista_oracle(problem.costs, problem.regularizer);
    log(err, 2, "ISTA oracle converged in " + std::to_string(optimum.iterations) + " iterations");

    RunOptions options;
    options.w_star = optimum.w_star;
    std::optional<FixedPoint> fixed_point;
    if (config.form == SolverForm::Reference) {
      fixed_point = construct_fixed_point(problem.costs, problem.topology.consensus, sc.mu, optimum);
      const double alpha = sc.alpha;
      if (problem.regularizer.is_zero()) {
        options.lyapunov = [&, alpha](const SolverState& s) {
          return lyapunov_smooth(s, *fixed_point, problem.topology.consensus, alpha);
        };
      } else {
        const double beta = steps.spectrum ? 1.0 - alpha * steps.spectrum->sigma_max : 1.0;
        options.lyapunov = [&, alpha, beta](const SolverState& s) {
          return lyapunov_general(s, *fixed_point, alpha, beta);
        };
      }
    }
    if (steps.constants) {
      options.metadata.emplace_back("delta", fmt(steps.constants->delta));
      options.metadata.emplace_back("nu", fmt(steps.constants->nu));
    }
    if (steps.spectrum) {
      options.metadata.emplace_back("sigma_max", fmt(steps.spectrum->sigma_max));
      options.metadata.emplace_back("sigma_under", fmt(steps.spectrum->sigma_under));
    }
    if (steps.certificate) {
      for (auto& kv : steps.certificate->entries()) options.metadata.push_back(kv);
    } else {
      options.metadata.emplace_back("mu", fmt(sc.mu));
      options.metadata.emplace_back("alpha", fmt(sc.alpha));
    }

    const RunResult result = run(problem, sc, config.form, options);
    if (!config.trace_path.empty()) write_trace_csv(config.trace_path, result.trace);
    if (!config.checkpoint_path.empty()) write_matrix_csv(config.checkpoint_path, result.state.w);

    const auto& last = result.trace.records.back();
    out << "form=" << result.trace.form << '\n';
    out << "iterations=" << last.iter << '\n';
    out << "converged=" << (result.converged ? "true" : "false") << '\n';
    out << "final_rel_sq_error=" << fmt(last.rel_sq_error.value_or(0.0)) << '\n';
    out << "consensus_residual=" << fmt(last.consensus_residual.value_or(0.0)) << '\n';
    try {
      const RateFit fit = fit_linear_rate(result.trace);
      out << "fitted_gamma=" << fmt(fit.gamma_hat) << '\n';
      out << "fitted_C=" << fmt(fit.c_hat) << '\n';
      out << "fit_r_squared=" << fmt(fit.r_squared) << '\n';
    } catch (const Error& e) {
      out << "fitted_gamma=\n";
      log(err, 2, e.what());
    }
    out << "certified_gamma=" << (steps.certificate ? fmt(steps.certificate->gamma) : "") << '\n';
    if (!config.trace_path.empty()) out << "trace=" << config.trace_path << '\n';
    return kExitOk;
  });
}

int cmd_certify(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_config(config_path);
    const Problem problem = build_problem(config);
    const ResolvedSteps steps = resolve_steps(config, problem, true);
    const auto& cert = *steps.certificate;
    out << "sigma_max=" << fmt(steps.spectrum->sigma_max) << '\n';
    out << "sigma_under=" << fmt(steps.spectrum->sigma_under) << '\n';
    out << "delta=" << fmt(steps.constants->delta) << '\n';
    out << "nu=" << fmt(steps.constants->nu) << '\n';
    for (const auto& [key, value] : cert.entries()) out << key << '=' << value << '\n';
    return kExitOk;
  });
}

int cmd_compare(const std::string& config_path, const std::vector<std::string>& forms, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    if (forms.size() < 2) throw Error(ErrorCode::InvalidConfig, "compare needs at least two forms");
    std::vector<SolverForm> parsed;
    for (const auto& f : forms) parsed.push_back(parse_solver_form(f));
    RunConfig config = load_config(config_path);
    const bool has_extra = std::find(parsed.begin(), parsed.end(), SolverForm::Extra) != parsed.end();
    if (has_extra) config.form = SolverForm::Extra;
    const Problem problem = build_problem(config);
    if (has_extra && !problem.regularizer.is_zero())
      throw Error(ErrorCode::InvalidConfig, "form 'extra' requires regularizer kind 'zero'");
    const ResolvedSteps steps = resolve_steps(config, problem, false);
    for (const auto& w : steps.warnings) log(err, 1, w);
    const SolverConfig sc = solver_config(config, steps);
    sc.validate();
    if (has_extra && sc.alpha != 1.0) throw Error(ErrorCode::InvalidConfig, "form 'extra' requires steps.alpha = 1");

    std::vector<SolverState> states;
    std::vector<StepFunction> stepper;
    for (auto f : parsed) {
      states.push_back(initial_state(problem.num_agents(), problem.dim(), sc));
      stepper.push_back(builtin_step(f));
    }
    double divergence = 0.0;
    for (int i = 1; i <= sc.max_iters; ++i) {
      for (std::size_t f = 0; f < parsed.size(); ++f) {
        stepper[f](states[f], problem, sc);
        states[f].iter = i;
        check_finite(states[f], to_string(parsed[f]));
      }
      for (std::size_t f = 1; f < parsed.size(); ++f)
        divergence = std::max(divergence, (states[f].w - states[0].w).cwiseAbs().maxCoeff());
    }
    out << "forms=";
    for (std::size_t f = 0; f < forms.size(); ++f) out << (f ? "," : "") << forms[f];
    out << '\n' << "iterations=" << sc.max_iters << '\n';
    out << "max_divergence=" << fmt(divergence) << '\n';
    const bool ok = divergence < 1e-8;
    out << "equivalent=" << (ok ? "true" : "false") << '\n';
    return ok ? kExitOk : kExitDivergence;
  });
}

int main(int argc, char** argv) {
  CLI::App app{"Decentralized proximal primal-dual optimization harness"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a solver and write the iteration trace");
  run_cmd->add_option("config", config_path, "JSON run config")->required();

  auto* certify_cmd = app.add_subcommand("certify", "Print the linear-rate certificate for a config");
  certify_cmd->add_option("config", config_path, "JSON run config")->required();

  std::vector<std::string> forms;
  auto* compare_cmd = app.add_subcommand("compare", "Run several forms in lockstep and report divergence");
  compare_cmd->add_option("config", config_path, "JSON run config")->required();
  compare_cmd->add_option("--forms", forms, "Comma-separated forms (agent,stacked,reference,extra)")
      ->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) return cmd_run(config_path, std::cout, std::cerr);
  if (*certify_cmd) return cmd_certify(config_path, std::cout, std::cerr);
  return cmd_compare(config_path, forms, std::cout, std::cerr);
}

}  // namespace p2d2::cli
