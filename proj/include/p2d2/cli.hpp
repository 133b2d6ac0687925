#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "p2d2/model.hpp"
#include "p2d2/prox.hpp"
#include "p2d2/solver.hpp"

namespace p2d2::cli {

struct GraphSpec {
  std::string type = "random";  ///< random | path | ring | complete | edges
  int num_agents = 20;
  double edge_prob = 0.2;
  std::optional<std::uint64_t> seed;  ///< random graphs; derived from the run seed when absent
  std::vector<Graph::Edge> edges;
};

struct DataSpec {
  std::string type = "synthetic";  ///< synthetic | libsvm
  // synthetic
  int samples_per_agent = 100;
  int dim = 50;
  double sparsity = 0.2;
  double noise = 0.05;
  // libsvm
  std::string path;
  LibsvmOptions libsvm;
};

struct StepSpec {
  std::string mode = "certified";  ///< certified | manual
  double safety = 0.5;
  double mu = 0.0;
  double alpha = 0.0;
};

struct RunConfig {
  GraphSpec graph;
  std::optional<std::string> combination_csv;
  DataSpec data;
  CostKind cost_kind = CostKind::Logistic;
  double l2_reg = 1e-2;
  Regularizer regularizer;
  SolverForm form = SolverForm::Agent;
  StepSpec steps;
  int max_iters = 1000;
  double tol = 0.0;
  int workers = 1;
  std::optional<Matrix> w0;
  std::uint64_t seed = 0;
  std::string trace_path;
  std::string checkpoint_path;
  bool record_timing = false;
};

/// Parses a JSON run config. Relative paths resolve against `base_dir`.
/// Throws Error(InvalidConfig) naming the offending field.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Topology and costs assembled from a config, all randomness derived from its seed.
Problem build_problem(const RunConfig& config);

/// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 forms diverge.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitDivergence = 4;

int cmd_run(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_certify(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& config_path, const std::vector<std::string>& forms, std::ostream& out,
                std::ostream& err);

/// Entry point shared by the executable and the tests.
int main(int argc, char** argv);

}  // namespace p2d2::cli
