#include "p2d2/solver.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "p2d2/error.hpp"

namespace p2d2 {

namespace {

constexpr double kDivergenceBound = 1e12;

// Runs fn(k) for k in [0, n) split into contiguous chunks. Each fn(k) only
// writes row k, so the result does not depend on the worker count.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  const int threads = std::min(workers, n);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      const int begin = n * t / threads;
      const int end = n * (t + 1) / threads;
      pool.emplace_back([&, begin, end] {
        try {
          for (int k = begin; k < end; ++k) fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void prox_rows(const Regularizer& reg, const Matrix& z, Matrix& w, double mu) {
  w.resize(z.rows(), z.cols());
  Vector row(z.cols());
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    row = z.row(k).transpose();
    prox_inplace(reg, row, mu);
    w.row(k) = row.transpose();
  }
}

void check_costs(std::span<const AgentCost> costs, const SolverState& state) {
  if (static_cast<Eigen::Index>(costs.size()) != state.w.rows())
    throw Error(ErrorCode::DimensionMismatch, "one cost per agent required");
}

}  // namespace

Problem::Problem(std::vector<AgentCost> c, Regularizer r, Topology t)
    : costs(std::move(c)), regularizer(r), topology(std::move(t)) {
  if (costs.empty()) throw Error(ErrorCode::InvalidConfig, "problem has no agents");
  if (static_cast<int>(costs.size()) != topology.num_agents())
    throw Error(ErrorCode::DimensionMismatch, std::to_string(costs.size()) + " costs for " +
                                                  std::to_string(topology.num_agents()) + " agents");
  for (const auto& cost : costs)
    if (cost.dim() != costs.front().dim()) throw Error(ErrorCode::DimensionMismatch, "agents disagree on dimension");
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (!(mu > 0.0) || !std::isfinite(mu)) fail("mu must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must lie in (0, 1]");
  if (max_iters < 0) fail("max_iters must be nonnegative");
  if (!(tol >= 0.0)) fail("tol must be nonnegative");
  if (workers < 1) fail("workers must be at least 1");
  if (w0 && !w0->allFinite()) fail("w0 must be finite");
}

SolverState initial_state(int num_agents, Eigen::Index dim, const SolverConfig& config) {
  SolverState s;
  if (config.w0) {
    if (config.w0->rows() != num_agents || config.w0->cols() != dim)
      throw Error(ErrorCode::DimensionMismatch, "w0 must be K x M");
    s.w = *config.w0;
  } else {
    s.w = Matrix::Zero(num_agents, dim);
  }
  s.z = Matrix::Zero(num_agents, dim);
  s.psi = Matrix::Zero(num_agents, dim);
  s.w_prev = Matrix::Zero(num_agents, dim);
  s.grad_prev = Matrix::Zero(num_agents, dim);
  s.y = Matrix::Zero(num_agents, dim);
  return s;
}

Matrix stacked_gradient(std::span<const AgentCost> costs, const Matrix& w) {
  Matrix g(w.rows(), w.cols());
  Vector row(w.cols());
  for (Eigen::Index k = 0; k < w.rows(); ++k) {
    costs[k].gradient(w.row(k).transpose(), row);
    g.row(k) = row.transpose();
  }
  return g;
}

AgentNetwork::AgentNetwork(const CombinationMatrix& combination) {
  const int k_agents = combination.num_agents();
  const Matrix& a = combination.weights();
  const Graph& g = combination.graph();
  links_.resize(k_agents);
  for (int k = 0; k < k_agents; ++k) {
    auto& links = links_[k];
    const auto& nbrs = g.neighbors(k);
    auto it = nbrs.begin();
    for (; it != nbrs.end() && *it < k; ++it) links.push_back({*it, -0.5 * a(*it, k)});
    links.push_back({k, 0.5 * (1.0 - a(k, k))});
    for (; it != nbrs.end(); ++it) links.push_back({*it, -0.5 * a(*it, k)});
  }
}

void p2d2_agent_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                     const AgentNetwork& network, const SolverConfig& config) {
  check_costs(costs, state);
  const int k_agents = static_cast<int>(state.w.rows());
  const Eigen::Index m = state.w.cols();
  const double mu = config.mu;
  const double alpha = config.alpha;

  // Communication phase: one K x M matrix of messages.
  Matrix message(k_agents, m);
  parallel_for(k_agents, config.workers, [&](int s) {
    message.row(s) = alpha * state.z.row(s) + state.w.row(s) - state.w_prev.row(s);
  });

  // Update phase.
  parallel_for(k_agents, config.workers, [&](int k) {
    Vector phi = Vector::Zero(m);
    for (const auto& link : network.neighborhood(k)) phi += link.weight * message.row(link.agent).transpose();
    Vector grad(m);
    const Vector w_k = state.w.row(k).transpose();
    costs[k].gradient(w_k, grad);
    const Vector psi_new = w_k - mu * grad;
    Vector z_k = state.z.row(k).transpose() + psi_new - state.psi.row(k).transpose() - phi;
    state.z.row(k) = z_k.transpose();
    state.psi.row(k) = psi_new.transpose();
    state.w_prev.row(k) = w_k.transpose();
    prox_inplace(reg, z_k, mu);
    state.w.row(k) = z_k.transpose();
  });
}

void p2d2_agent_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                     const CombinationMatrix& combination, const SolverConfig& config) {
  p2d2_agent_step(state, costs, reg, AgentNetwork(combination), config);
}

void p2d2_stacked_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                       const ConsensusMatrix& b, const SolverConfig& config) {
  check_costs(costs, state);
  const Matrix& bm = b.matrix();
  const Matrix grad = stacked_gradient(costs, state.w);
  const Matrix diff = state.w - state.w_prev;
  state.z = state.z - config.alpha * (bm * state.z) + diff - bm * diff - config.mu * (grad - state.grad_prev);
  state.w_prev = state.w;
  state.grad_prev = grad;
  prox_rows(reg, state.z, state.w, config.mu);
}

void p2d2_reference_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                         const ConsensusMatrix& b, const SolverConfig& config) {
  check_costs(costs, state);
  const Matrix& bm = b.matrix();
  const Matrix& root = b.sqrt();
  const Matrix grad = stacked_gradient(costs, state.w);
  // grad J_mu(w) = grad J(w) + B w / mu
  state.z = state.w - config.mu * grad - bm * state.w - root * state.y;
  state.y += config.alpha * (root * state.z);
  state.w_prev = state.w;
  state.grad_prev = grad;
  prox_rows(reg, state.z, state.w, config.mu);
}

void check_finite(const SolverState& state, const std::string& form) {
  auto bad = [](const Matrix& m) {
    return !m.allFinite() || (m.size() > 0 && m.cwiseAbs().maxCoeff() > kDivergenceBound);
  };
  const char* which = bad(state.w) ? "w" : bad(state.z) ? "z" : bad(state.y) ? "y" : nullptr;
  if (which)
    throw Error(ErrorCode::NonFiniteIterate, form + " iterate " + which + " diverged at iteration " +
                                                 std::to_string(state.iter) + " (entry non-finite or above 1e12)");
}

std::string to_string(SolverForm form) {
  switch (form) {
    case SolverForm::Agent: return "agent";
    case SolverForm::Stacked: return "stacked";
    case SolverForm::Reference: return "reference";
    case SolverForm::Extra: return "extra";
  }
  return "unknown";
}

SolverForm parse_solver_form(const std::string& name) {
  if (name == "agent") return SolverForm::Agent;
  if (name == "stacked") return SolverForm::Stacked;
  if (name == "reference") return SolverForm::Reference;
  if (name == "extra") return SolverForm::Extra;
  throw Error(ErrorCode::InvalidConfig, "unknown solver form '" + name + "' (agent|stacked|reference|extra)");
}

StepFunction builtin_step(SolverForm form) {
  switch (form) {
    case SolverForm::Agent:
      return [network = std::optional<AgentNetwork>{}](SolverState& s, const Problem& p,
                                                      const SolverConfig& c) mutable {
        if (!network) network.emplace(p.topology.combination);
        p2d2_agent_step(s, p.costs, p.regularizer, *network, c);
      };
    case SolverForm::Stacked:
    case SolverForm::Extra:
      return [](SolverState& s, const Problem& p, const SolverConfig& c) {
        p2d2_stacked_step(s, p.costs, p.regularizer, p.topology.consensus, c);
      };
    case SolverForm::Reference:
      return [](SolverState& s, const Problem& p, const SolverConfig& c) {
        p2d2_reference_step(s, p.costs, p.regularizer, p.topology.consensus, c);
      };
  }
  throw Error(ErrorCode::InvalidConfig, "unknown solver form");
}

double relative_squared_error(const Matrix& w, const Vector& w_star) {
  double num = 0.0;
  for (Eigen::Index k = 0; k < w.rows(); ++k) num += (w.row(k).transpose() - w_star).squaredNorm();
  const double den = w_star.squaredNorm();
  return den > 0.0 ? num / den : num;
}

RunResult run_with(const Problem& problem, const SolverConfig& config, const StepFunction& step,
                   const std::string& label, const RunOptions& options) {
  config.validate();
  if (options.w_star && options.w_star->size() != problem.dim())
    throw Error(ErrorCode::DimensionMismatch, "w_star has the wrong length");

  RunResult result;
  result.state = initial_state(problem.num_agents(), problem.dim(), config);
  result.trace.form = label;
  result.trace.metadata = options.metadata;
  result.trace.records.reserve(static_cast<std::size_t>(config.max_iters) + 1);

  const auto start = std::chrono::steady_clock::now();
  const Matrix& bm = problem.topology.consensus.matrix();
  Matrix previous;

  auto record = [&](const SolverState& s) {
    TraceRecord r;
    r.iter = s.iter;
    if (options.w_star) r.rel_sq_error = relative_squared_error(s.w, *options.w_star);
    r.consensus_residual = (bm * s.w).norm();
    const Vector mean = s.w.colwise().mean().transpose();
    r.objective = average_value(problem.costs, mean) + problem.regularizer.value(mean);
    if (s.iter > 0) r.fixed_point_residual = (s.w - previous).norm() / std::max(1.0, s.w.norm());
    if (options.lyapunov) r.lyapunov = options.lyapunov(s);
    if (config.record_timing)
      r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.records.push_back(r);
    return r;
  };

  record(result.state);
  for (int i = 1; i <= config.max_iters; ++i) {
    previous = result.state.w;
    step(result.state, problem, config);
    result.state.iter = i;
    check_finite(result.state, label);
    const TraceRecord r = record(result.state);
    if (options.observer) options.observer(result.state);
    if (config.tol > 0.0) {
      const auto metric = r.rel_sq_error ? r.rel_sq_error : r.fixed_point_residual;
      if (metric && *metric < config.tol) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

RunResult run(const Problem& problem, const SolverConfig& config, SolverForm form, const RunOptions& options) {
  if (form == SolverForm::Extra) return extra_solver(problem, config, options);
  return run_with(problem, config, builtin_step(form), to_string(form), options);
}

RunResult extra_solver(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  if (!problem.regularizer.is_zero())
    throw Error(ErrorCode::InvalidConfig, "EXTRA requires the zero regularizer, got " +
                                              to_string(problem.regularizer.kind));
  if (config.alpha != 1.0) throw Error(ErrorCode::InvalidConfig, "EXTRA requires alpha = 1");
  return run_with(problem, config, builtin_step(SolverForm::Stacked), "extra", options);
}

IstaResult ista_oracle(std::span<const AgentCost> costs, const Regularizer& reg, const IstaOptions& options) {
  if (costs.empty()) throw Error(ErrorCode::InvalidParameter, "no costs given");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "ISTA tolerance must be positive");
  const double step = options.step.value_or(0.99 / average_smoothness(costs));
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorCode::InvalidParameter, "ISTA step must be positive");

  const Eigen::Index m = costs.front().dim();
  IstaResult out;
  Vector w = Vector::Zero(m);
  Vector z = w;
  double residual = std::numeric_limits<double>::infinity();
  int t = 0;
  while (t < options.max_iters) {
    ++t;
    z = w - step * average_gradient(costs, w);
    Vector next = prox(reg, z, step);
    residual = (next - w).norm() / std::max(1.0, next.norm());
    w = std::move(next);
    if (!w.allFinite()) throw Error(ErrorCode::NonFiniteIterate, "ISTA diverged at iteration " + std::to_string(t));
    if (residual < options.tol) break;
  }
  if (residual >= options.tol && residual > 10.0 * options.tol)
    throw Error(ErrorCode::NoConvergence, "ISTA stopped after " + std::to_string(t) +
                                              " iterations with residual " + std::to_string(residual));
  out.w_star = w;
  out.r_star = (z - w) / step;
  out.iterations = t;
  out.residual = residual;
  return out;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, m(i, j), std::chars_format::general, 17);
      out.write(buf, end - buf);
    }
    out << '\n';
  }
}

}  // namespace p2d2
