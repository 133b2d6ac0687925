#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "p2d2/model.hpp"
#include "p2d2/prox.hpp"
#include "p2d2/topology.hpp"
#include "p2d2/trace.hpp"

namespace p2d2 {

/// Everything a run needs: private costs, the common regularizer and the network.
struct Problem {
  std::vector<AgentCost> costs;
  Regularizer regularizer;
  Topology topology;

  Problem(std::vector<AgentCost> c, Regularizer r, Topology t);

  int num_agents() const noexcept { return topology.num_agents(); }
  Eigen::Index dim() const noexcept { return costs.front().dim(); }
};

struct SolverConfig {
  double mu = 0.0;     ///< primal step size
  double alpha = 1.0;  ///< dual step size, in (0, 1]
  int max_iters = 1000;
  double tol = 0.0;    ///< relative-error stop; 0 disables
  std::optional<Matrix> w0;  ///< K x M initial iterate; zeros when absent
  int workers = 1;     ///< threads used for the per-agent rounds
  bool record_timing = false;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

/// Row k of every matrix belongs to agent k.
struct SolverState {
  Matrix w;          ///< w_{i-1} before a step, w_i after
  Matrix z;
  Matrix psi;        ///< per-agent memory psi_{k,i-1}
  Matrix w_prev;     ///< w_{i-2} before a step
  Matrix grad_prev;  ///< grad J(w_{i-2}) for the stacked form
  Matrix y;          ///< dual variable, reference form only
  int iter = 0;
};

/// z_0 = w_{-1} = 0, psi_0 = 0, stored gradient 0, y_0 = 0 and w_0 from the config.
SolverState initial_state(int num_agents, Eigen::Index dim, const SolverConfig& config);

/// Row-wise gradients grad J_k(w_k).
Matrix stacked_gradient(std::span<const AgentCost> costs, const Matrix& w);

/// Neighborhoods N_k u {k} with weights b_sk = (delta_sk - a_sk)/2, ascending in s.
class AgentNetwork {
 public:
  struct Link {
    int agent;
    double weight;
  };

  explicit AgentNetwork(const CombinationMatrix& combination);

  int num_agents() const noexcept { return static_cast<int>(links_.size()); }
  const std::vector<Link>& neighborhood(int k) const { return links_.at(k); }

 private:
  std::vector<std::vector<Link>> links_;
};

/// One synchronous round of the per-agent algorithm. Each agent broadcasts
/// alpha z + w - w_prev, then combines, takes its gradient step and applies prox.
void p2d2_agent_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                     const AgentNetwork& network, const SolverConfig& config);
void p2d2_agent_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                     const CombinationMatrix& combination, const SolverConfig& config);

/// z_i = (I - alpha B) z_{i-1} + (I - B)(w_{i-1} - w_{i-2}) - mu (grad(w_{i-1}) - grad(w_{i-2})), w_i = prox(z_i).
void p2d2_stacked_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                       const ConsensusMatrix& b, const SolverConfig& config);

/// Primal descent / dual ascent / prox with an explicit dual y and B^{1/2}.
void p2d2_reference_step(SolverState& state, std::span<const AgentCost> costs, const Regularizer& reg,
                         const ConsensusMatrix& b, const SolverConfig& config);

/// Throws NonFiniteIterate if any entry is non-finite or exceeds 1e12 in magnitude.
void check_finite(const SolverState& state, const std::string& form);

enum class SolverForm { Agent, Stacked, Reference, Extra };

std::string to_string(SolverForm form);
SolverForm parse_solver_form(const std::string& name);

/// Extension point: any solver with this step signature can be run and traced.
using StepFunction = std::function<void(SolverState&, const Problem&, const SolverConfig&)>;

StepFunction builtin_step(SolverForm form);

struct RunOptions {
  std::optional<Vector> w_star;
  /// Evaluated on the state after every step (and at iteration 0) when set.
  std::function<double(const SolverState&)> lyapunov;
  std::vector<std::pair<std::string, std::string>> metadata;
  /// Called after every step, e.g. to compare forms in lockstep.
  std::function<void(const SolverState&)> observer;
};

struct RunResult {
  IterationTrace trace;
  SolverState state;
  bool converged = false;
};

RunResult run(const Problem& problem, const SolverConfig& config, SolverForm form, const RunOptions& options = {});
RunResult run_with(const Problem& problem, const SolverConfig& config, const StepFunction& step,
                   const std::string& label, const RunOptions& options = {});

/// The stacked recursion with R = 0 and alpha = 1; throws InvalidConfig otherwise.
RunResult extra_solver(const Problem& problem, const SolverConfig& config, const RunOptions& options = {});

/// Sum_k |w_k - w*|^2 / |w*|^2 (absolute when w* = 0).
double relative_squared_error(const Matrix& w, const Vector& w_star);

struct IstaResult {
  Vector w_star;
  Vector r_star;  ///< subgradient of R at w_star with grad Jbar(w_star) + r_star ~ 0
  int iterations = 0;
  double residual = 0.0;
};

struct IstaOptions {
  std::optional<double> step;  ///< defaults to 0.99 / smoothness of the average cost
  double tol = 1e-12;
  int max_iters = 1'000'000;
};

/// Centralized proximal gradient on (1/K) sum_k J_k + R. Throws NoConvergence.
IstaResult ista_oracle(std::span<const AgentCost> costs, const Regularizer& reg, const IstaOptions& options = {});

/// Row-wise CSV writer for the final iterate.
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace p2d2
