#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace p2d2 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected simple graph over agents 0..K-1. Self-loops are implicit and never stored.
class Graph {
 public:
  using Edge = std::pair<int, int>;

  Graph() = default;
  /// Edges are normalized to (min, max) and sorted; throws InvalidGraph on
  /// self-loops, duplicates or out-of-range indices.
  Graph(int num_agents, std::vector<Edge> edges);

  static Graph path(int num_agents);
  static Graph ring(int num_agents);
  static Graph complete(int num_agents);

  int num_agents() const noexcept { return num_agents_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& neighbors(int k) const { return adjacency_.at(k); }
  int degree(int k) const { return static_cast<int>(adjacency_.at(k).size()); }
  bool has_edge(int s, int k) const;
  bool is_connected() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.num_agents_ == b.num_agents_ && a.edges_ == b.edges_;
  }

 private:
  int num_agents_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;  // ascending neighbor indices
};

/// Erdos-Renyi draw retried until connected. Deterministic for a fixed seed.
Graph random_connected_graph(int num_agents, double edge_prob, std::uint64_t seed);

/// Symmetric doubly stochastic, primitive combination matrix A matched to a graph.
class CombinationMatrix {
 public:
  /// Validates every invariant against `graph`; throws InvalidCombinationMatrix.
  CombinationMatrix(Matrix weights, Graph graph);

  /// Accepts a raw matrix; the graph is read off the off-diagonal sparsity pattern.
  static CombinationMatrix from_matrix(Matrix weights);

  const Matrix& weights() const noexcept { return weights_; }
  const Graph& graph() const noexcept { return graph_; }
  int num_agents() const noexcept { return graph_.num_agents(); }
  /// Smallest p <= K with A^p entrywise positive.
  int primitivity_power() const noexcept { return primitivity_power_; }

 private:
  Matrix weights_;
  Graph graph_;
  int primitivity_power_ = 0;
};

/// Metropolis rule: a_sk = 1 / (1 + max(deg s, deg k)) on edges, diagonal fills the row.
CombinationMatrix metropolis_weights(const Graph& graph);

/// Reads K rows of K comma-separated values.
CombinationMatrix load_combination_csv(const std::string& path);

/// B = (I - A) / 2 at agent level. The KM-level operator is B (x) I_M and is
/// applied to K x M row-stacked iterates as a plain left product.
class ConsensusMatrix {
 public:
  explicit ConsensusMatrix(const CombinationMatrix& combination);
  explicit ConsensusMatrix(Matrix b);

  const Matrix& matrix() const noexcept { return b_; }
  int num_agents() const noexcept { return static_cast<int>(b_.rows()); }
  /// Ascending eigenvalues, negatives clamped to zero.
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }

  /// Symmetric square root; computed on first use and cached. Thread-safe.
  const Matrix& sqrt() const;
  /// Moore-Penrose pseudo-inverse of sqrt(), with the null threshold of spectral_bounds.
  const Matrix& sqrt_pinv() const;

 private:
  struct Cache;
  Matrix b_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  std::shared_ptr<Cache> cache_;
};

ConsensusMatrix consensus_matrix(const CombinationMatrix& combination);

inline constexpr double kNullEigenvalueThreshold = 1e-10;

struct SpectralBounds {
  double sigma_max = 0.0;
  double sigma_under = 0.0;  ///< smallest nonzero eigenvalue of B
};

SpectralBounds spectral_bounds(const ConsensusMatrix& b);

/// Everything the solvers need about the network, built once.
struct Topology {
  CombinationMatrix combination;
  ConsensusMatrix consensus;

  explicit Topology(CombinationMatrix a)
      : combination(std::move(a)), consensus(combination) {}

  int num_agents() const noexcept { return combination.num_agents(); }
};

}  // namespace p2d2
