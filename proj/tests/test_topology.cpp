#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "p2d2/error.hpp"
#include "p2d2/topology.hpp"
#include "support.hpp"

using namespace p2d2;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::NumericalFailure;
}

void check_invariants(const CombinationMatrix& a) {
  const Matrix& w = a.weights();
  const int k = a.num_agents();
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((w.rowwise().sum() - Vector::Ones(k)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w.colwise().sum().transpose() - Vector::Ones(k)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(w.minCoeff() >= 0.0);
  for (int s = 0; s < k; ++s)
    for (int t = 0; t < k; ++t)
      if (s != t && !a.graph().has_edge(s, t)) CHECK(w(s, t) == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(w);
  CHECK(es.eigenvalues().minCoeff() > -1.0);
  CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
  CHECK(a.primitivity_power() >= 1);
  CHECK(a.primitivity_power() <= k);
}

}  // namespace

TEST_CASE("metropolis weights on a three-node path") {
  const auto a = metropolis_weights(Graph::path(3));
  Matrix expected(3, 3);
  expected << 2.0 / 3, 1.0 / 3, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 1.0 / 3, 2.0 / 3;
  CHECK(testing::max_abs_diff(a.weights(), expected) < 1e-15);
  check_invariants(a);
}

TEST_CASE("metropolis weights on the complete graph are uniform") {
  const auto a = metropolis_weights(Graph::complete(3));
  CHECK(testing::max_abs_diff(a.weights(), Matrix::Constant(3, 3, 1.0 / 3)) < 1e-15);
  CHECK(a.primitivity_power() == 1);
}

TEST_CASE("metropolis weights reject a disconnected graph") {
  CHECK(code_of([] { metropolis_weights(Graph(2, {})); }) == ErrorCode::DisconnectedGraph);
  CHECK(code_of([] { metropolis_weights(Graph(1, {})); }) == ErrorCode::EmptyGraph);
}

TEST_CASE("graph construction validates edges") {
  CHECK(code_of([] { Graph(3, {{0, 0}}); }) == ErrorCode::InvalidGraph);
  CHECK(code_of([] { Graph(3, {{0, 1}, {1, 0}}); }) == ErrorCode::InvalidGraph);
  CHECK(code_of([] { Graph(3, {{0, 3}}); }) == ErrorCode::InvalidGraph);
  const Graph g(4, {{2, 1}, {0, 1}});
  CHECK(g.edges() == std::vector<Graph::Edge>{{0, 1}, {1, 2}});
  CHECK(g.neighbors(1) == std::vector<int>{0, 2});
  CHECK_FALSE(g.is_connected());
  CHECK(Graph::ring(5).is_connected());
  CHECK(Graph::ring(5).degree(3) == 2);
}

TEST_CASE("consensus matrix of the trivial network is zero") {
  const ConsensusMatrix b(CombinationMatrix::from_matrix(Matrix::Ones(1, 1)));
  CHECK(b.matrix().norm() == 0.0);
  CHECK(b.sqrt().norm() == 0.0);
  CHECK(code_of([&] { spectral_bounds(b); }) == ErrorCode::DegenerateSpectrum);
}

TEST_CASE("consensus eigenvalues and spectral bounds") {
  SUBCASE("complete graph K=3") {
    const ConsensusMatrix b(metropolis_weights(Graph::complete(3)));
    CHECK(b.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.eigenvalues()(1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.eigenvalues()(2) == doctest::Approx(0.5).epsilon(1e-12));
    const auto s = spectral_bounds(b);
    CHECK(s.sigma_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.sigma_under == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("path graph K=3") {
    const ConsensusMatrix b(metropolis_weights(Graph::path(3)));
    CHECK(std::abs(b.eigenvalues()(0)) < 1e-12);
    CHECK(b.eigenvalues()(1) == doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK(b.eigenvalues()(2) == doctest::Approx(0.5).epsilon(1e-12));
    const auto s = spectral_bounds(b);
    CHECK(s.sigma_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.sigma_under == doctest::Approx(1.0 / 6).epsilon(1e-12));
  }
  SUBCASE("complete graph K=2") {
    const auto a = metropolis_weights(Graph::complete(2));
    CHECK(testing::max_abs_diff(a.weights(), Matrix::Constant(2, 2, 0.5)) < 1e-15);
    const auto s = spectral_bounds(ConsensusMatrix(a));
    CHECK(s.sigma_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.sigma_under == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("square root and pseudo-inverse of B") {
  const ConsensusMatrix b(metropolis_weights(random_connected_graph(8, 0.4, 3)));
  const Matrix& r = b.sqrt();
  CHECK(testing::max_abs_diff(r * r, b.matrix()) < 1e-12);
  CHECK(testing::max_abs_diff(r, r.transpose()) < 1e-14);
  const Matrix& p = b.sqrt_pinv();
  CHECK(testing::max_abs_diff(r * p * r, r) < 1e-12);
  CHECK(testing::max_abs_diff(p * r * p, p) < 1e-10);
  // Consensus vectors span the null space.
  CHECK((b.matrix() * Vector::Ones(8)).norm() < 1e-14);
  CHECK((r * Vector::Ones(8)).norm() < 1e-14);
}

TEST_CASE("random connected graph") {
  const auto g2 = random_connected_graph(2, 1.0, 11);
  CHECK(g2.edges() == std::vector<Graph::Edge>{{0, 1}});
  const auto g5 = random_connected_graph(5, 1.0, 99);
  CHECK(g5.edges().size() == 10);
  const auto a = random_connected_graph(20, 0.2, 7);
  const auto b = random_connected_graph(20, 0.2, 7);
  CHECK(a == b);
  CHECK(a.is_connected());
  CHECK_FALSE(a == random_connected_graph(20, 0.2, 8));
  CHECK(code_of([] { random_connected_graph(1, 0.5, 0); }) == ErrorCode::EmptyGraph);
  CHECK(code_of([] { random_connected_graph(4, 0.0, 0); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { random_connected_graph(200, 1e-6, 0); }) == ErrorCode::GenerationExhausted);
}

TEST_CASE("combination matrix invariants hold on random graphs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int k = 2 + static_cast<int>(seed % 15);
    const double p = 0.15 + 0.05 * static_cast<double>(seed % 10);
    const auto a = metropolis_weights(random_connected_graph(k, p, seed));
    check_invariants(a);
    const auto s = spectral_bounds(ConsensusMatrix(a));
    CHECK(s.sigma_under > 0.0);
    CHECK(s.sigma_under <= s.sigma_max);
    CHECK(s.sigma_max < 1.0);
  }
}

TEST_CASE("invalid combination matrices are rejected") {
  Matrix asym(2, 2);
  asym << 0.6, 0.4, 0.5, 0.5;
  CHECK(code_of([&] { CombinationMatrix::from_matrix(asym); }) == ErrorCode::InvalidCombinationMatrix);
  Matrix rows(2, 2);
  rows << 0.7, 0.4, 0.4, 0.7;
  CHECK(code_of([&] { CombinationMatrix::from_matrix(rows); }) == ErrorCode::InvalidCombinationMatrix);
  // Bipartite swap has eigenvalue -1.
  Matrix swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  CHECK(code_of([&] { CombinationMatrix::from_matrix(swap); }) == ErrorCode::InvalidCombinationMatrix);
  // Weight on a non-edge.
  CHECK(code_of([] { CombinationMatrix(Matrix::Constant(3, 3, 1.0 / 3), Graph::path(3)); }) ==
        ErrorCode::InvalidCombinationMatrix);
  // Disconnected: identity is doubly stochastic but not primitive.
  CHECK(code_of([] { CombinationMatrix::from_matrix(Matrix::Identity(3, 3)); }) ==
        ErrorCode::InvalidCombinationMatrix);
}

TEST_CASE("combination matrix loads from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "p2d2_combination.csv";
  {
    std::ofstream out(path);
    out << "0.5,0.5,0\n0.5,0.25,0.25\n0,0.25,0.75\n";
  }
  const auto a = load_combination_csv(path.string());
  CHECK(a.num_agents() == 3);
  CHECK(a.graph() == Graph::path(3));
  CHECK(a.weights()(1, 2) == 0.25);
  std::filesystem::remove(path);
}
