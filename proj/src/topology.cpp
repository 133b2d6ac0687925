#include "p2d2/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

#include "p2d2/error.hpp"
#include "p2d2/random.hpp"

namespace p2d2 {

namespace {

constexpr double kMatrixTol = 1e-12;

}  // namespace

Graph::Graph(int num_agents, std::vector<Edge> edges) : num_agents_(num_agents) {
  if (num_agents < 1) throw Error(ErrorCode::EmptyGraph, "graph needs at least one agent");
  for (auto& [s, k] : edges) {
    if (s < 0 || k < 0 || s >= num_agents || k >= num_agents)
      throw Error(ErrorCode::InvalidGraph, "edge index out of range [0, " +
                                               std::to_string(num_agents) + ")");
    if (s == k) throw Error(ErrorCode::InvalidGraph, "self-loop on agent " + std::to_string(s));
    if (s > k) std::swap(s, k);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw Error(ErrorCode::InvalidGraph, "duplicate edge");
  edges_ = std::move(edges);

  adjacency_.assign(num_agents, {});
  for (const auto& [s, k] : edges_) {
    adjacency_[s].push_back(k);
    adjacency_[k].push_back(s);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

Graph Graph::path(int num_agents) {
  std::vector<Edge> edges;
  for (int k = 0; k + 1 < num_agents; ++k) edges.emplace_back(k, k + 1);
  return Graph(num_agents, std::move(edges));
}

Graph Graph::ring(int num_agents) {
  if (num_agents < 3) return path(num_agents);
  std::vector<Edge> edges;
  for (int k = 0; k < num_agents; ++k) edges.emplace_back(k, (k + 1) % num_agents);
  return Graph(num_agents, std::move(edges));
}

Graph Graph::complete(int num_agents) {
  std::vector<Edge> edges;
  for (int s = 0; s < num_agents; ++s)
    for (int k = s + 1; k < num_agents; ++k) edges.emplace_back(s, k);
  return Graph(num_agents, std::move(edges));
}

bool Graph::has_edge(int s, int k) const {
  const auto& nbrs = adjacency_.at(s);
  return std::binary_search(nbrs.begin(), nbrs.end(), k);
}

bool Graph::is_connected() const {
  if (num_agents_ == 0) return false;
  std::vector<char> seen(num_agents_, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    for (int s : adjacency_[k]) {
      if (!seen[s]) {
        seen[s] = 1;
        ++visited;
        stack.push_back(s);
      }
    }
  }
  return visited == num_agents_;
}

Graph random_connected_graph(int num_agents, double edge_prob, std::uint64_t seed) {
  if (num_agents < 2) throw Error(ErrorCode::EmptyGraph, "random graph needs K >= 2");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "edge probability must lie in (0, 1]");
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Graph::Edge> edges;
    for (int s = 0; s < num_agents; ++s)
      for (int k = s + 1; k < num_agents; ++k)
        if (unif(rng) < edge_prob) edges.emplace_back(s, k);
    Graph g(num_agents, std::move(edges));
    if (g.is_connected()) return g;
  }
  throw Error(ErrorCode::GenerationExhausted,
              "no connected graph after " + std::to_string(kMaxAttempts) + " attempts");
}

namespace {

// Smallest p in [1, K] with A^p > 0 entrywise, 0 if none.
int find_primitivity_power(const Matrix& a) {
  const auto k = a.rows();
  using Pattern = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  Pattern base = (a.array().abs() > 0.0).cast<int>();
  Pattern power = base;
  for (int p = 1; p <= k; ++p) {
    if ((power.array() > 0).all()) return p;
    power = ((power * base).array() > 0).cast<int>();
  }
  return 0;
}

void validate_combination(const Matrix& a, const Graph& graph) {
  const auto k = a.rows();
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidCombinationMatrix, msg); };
  if (a.cols() != k || k != graph.num_agents()) fail("matrix is not K x K for the graph");
  if (!a.allFinite()) fail("non-finite weight");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kMatrixTol) fail("not symmetric");
  const Vector ones = Vector::Ones(k);
  if (((a * ones) - ones).cwiseAbs().maxCoeff() > kMatrixTol) fail("rows do not sum to one");
  if (((a.transpose() * ones) - ones).cwiseAbs().maxCoeff() > kMatrixTol)
    fail("columns do not sum to one");
  for (int s = 0; s < k; ++s)
    for (int j = 0; j < k; ++j)
      if (s != j && a(s, j) != 0.0 && !graph.has_edge(s, j))
        fail("weight on non-edge (" + std::to_string(s) + ", " + std::to_string(j) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "eigendecomposition of A failed");
  if (eig.eigenvalues().minCoeff() <= -1.0 + kMatrixTol || eig.eigenvalues().maxCoeff() > 1.0 + kMatrixTol)
    fail("eigenvalues outside (-1, 1]");
}

}  // namespace

CombinationMatrix::CombinationMatrix(Matrix weights, Graph graph)
    : weights_(std::move(weights)), graph_(std::move(graph)) {
  validate_combination(weights_, graph_);
  primitivity_power_ = find_primitivity_power(weights_);
  if (primitivity_power_ == 0)
    throw Error(ErrorCode::InvalidCombinationMatrix,
                "not primitive: no power A^p with p <= K is entrywise positive");
}

CombinationMatrix CombinationMatrix::from_matrix(Matrix weights) {
  const auto k = weights.rows();
  if (k < 1 || weights.cols() != k)
    throw Error(ErrorCode::InvalidCombinationMatrix, "matrix must be square and nonempty");
  std::vector<Graph::Edge> edges;
  for (int s = 0; s < k; ++s)
    for (int j = s + 1; j < k; ++j)
      if (weights(s, j) != 0.0 || weights(j, s) != 0.0) edges.emplace_back(s, j);
  Graph graph(static_cast<int>(k), std::move(edges));
  return CombinationMatrix(std::move(weights), std::move(graph));
}

CombinationMatrix metropolis_weights(const Graph& graph) {
  const int k = graph.num_agents();
  if (k < 2) throw Error(ErrorCode::EmptyGraph, "Metropolis weights need K >= 2");
  if (!graph.is_connected()) throw Error(ErrorCode::DisconnectedGraph, "graph is not connected");
  Matrix a = Matrix::Zero(k, k);
  for (const auto& [s, j] : graph.edges()) {
    const double w = 1.0 / (1.0 + std::max(graph.degree(s), graph.degree(j)));
    a(s, j) = w;
    a(j, s) = w;
  }
  for (int s = 0; s < k; ++s) {
    double off = 0.0;
    for (int j : graph.neighbors(s)) off += a(s, j);  // ascending order
    a(s, s) = 1.0 - off;
  }
  return CombinationMatrix(std::move(a), graph);
}

CombinationMatrix load_combination_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix a(k, k);
  for (Eigen::Index s = 0; s < k; ++s) {
    if (static_cast<Eigen::Index>(rows[s].size()) != k)
      throw Error(ErrorCode::ParseError, path + ": row " + std::to_string(s + 1) + " does not have " +
                                             std::to_string(k) + " columns");
    for (Eigen::Index j = 0; j < k; ++j) a(s, j) = rows[s][j];
  }
  return CombinationMatrix::from_matrix(std::move(a));
}

struct ConsensusMatrix::Cache {
  std::once_flag once;
  Matrix sqrt;
  Matrix sqrt_pinv;
};

ConsensusMatrix::ConsensusMatrix(const CombinationMatrix& combination)
    : ConsensusMatrix(Matrix(0.5 * (Matrix::Identity(combination.num_agents(), combination.num_agents()) -
                                    combination.weights()))) {}

ConsensusMatrix::ConsensusMatrix(Matrix b) : b_(std::move(b)), cache_(std::make_shared<Cache>()) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b_);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "eigendecomposition of B failed");
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  eigenvectors_ = eig.eigenvectors();
}

const Matrix& ConsensusMatrix::sqrt() const {
  std::call_once(cache_->once, [this] {
    // Null eigenvalues carry rounding noise of order 1e-16 whose square root
    // would leak 1e-8 into the consensus direction; they are snapped to zero.
    const Vector root = (eigenvalues_.array() > kNullEigenvalueThreshold).select(eigenvalues_.cwiseSqrt(), 0.0);
    cache_->sqrt = eigenvectors_ * root.asDiagonal() * eigenvectors_.transpose();
    Vector inv_root = Vector::Zero(root.size());
    for (Eigen::Index j = 0; j < root.size(); ++j)
      if (eigenvalues_[j] > kNullEigenvalueThreshold) inv_root[j] = 1.0 / root[j];
    cache_->sqrt_pinv = eigenvectors_ * inv_root.asDiagonal() * eigenvectors_.transpose();
  });
  return cache_->sqrt;
}

const Matrix& ConsensusMatrix::sqrt_pinv() const {
  sqrt();
  return cache_->sqrt_pinv;
}

ConsensusMatrix consensus_matrix(const CombinationMatrix& combination) {
  return ConsensusMatrix(combination);
}

SpectralBounds spectral_bounds(const ConsensusMatrix& b) {
  const Vector& ev = b.eigenvalues();
  SpectralBounds out;
  bool found = false;
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    if (ev[j] > kNullEigenvalueThreshold) {
      if (!found) out.sigma_under = ev[j];
      found = true;
      out.sigma_max = std::max(out.sigma_max, ev[j]);
    }
  }
  if (!found) throw Error(ErrorCode::DegenerateSpectrum, "B has no eigenvalue above the null threshold");
  return out;
}

}  // namespace p2d2
