#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "p2d2/model.hpp"
#include "p2d2/prox.hpp"
#include "p2d2/solver.hpp"
#include "p2d2/topology.hpp"

namespace p2d2::testing {

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

inline Topology random_topology(int k, std::uint64_t seed, double p = 0.5) {
  if (k == 1) return Topology(CombinationMatrix::from_matrix(Matrix::Ones(1, 1)));
  return Topology(metropolis_weights(random_connected_graph(k, p, seed)));
}

inline Problem logistic_problem(int k, int m, std::uint64_t seed, Regularizer reg, int samples = 20,
                                double lambda = 0.05) {
  SyntheticLogisticParams p;
  p.num_agents = k;
  p.samples_per_agent = samples;
  p.dim = m;
  p.l2_reg = lambda;
  p.seed = seed;
  return Problem(synthesize_logistic(p).costs, reg, random_topology(k, seed + 1));
}

inline Problem quadratic_problem(int k, int m, std::uint64_t seed, Regularizer reg, double lambda = 0.05) {
  return Problem(synthesize_quadratic(k, m, seed, lambda), reg, random_topology(k, seed + 1));
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace p2d2::testing
