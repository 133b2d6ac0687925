#include <doctest.h>

#include <limits>

#include "p2d2/error.hpp"
#include "p2d2/prox.hpp"
#include "support.hpp"

using namespace p2d2;

namespace {

double prox_objective(const Regularizer& reg, double v, double z, double mu) {
  Vector x(1);
  x << v;
  return reg.value(x) + (v - z) * (v - z) / (2 * mu);
}

// Independent oracle: golden-section minimization of one coordinate of
// r(v) + (v - z)^2 / (2 mu) over a bracket that contains the minimizer.
// Comparison-based search locates the argmin only to about sqrt(eps).
double scalar_prox_oracle(const Regularizer& reg, double z, double mu) {
  auto objective = [&](double v) { return prox_objective(reg, v, z, mu); };
  double lo = -std::abs(z) - 1.0, hi = std::abs(z) + 1.0;
  if (reg.kind == RegularizerKind::NonnegIndicator) lo = 0.0;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  for (int i = 0; i < 200; ++i) {
    if (objective(a) < objective(b)) {
      hi = b;
      b = a;
      a = hi - phi * (hi - lo);
    } else {
      lo = a;
      a = b;
      b = lo + phi * (hi - lo);
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<Regularizer> all_kinds() {
  return {Regularizer::zero(), Regularizer::l1(0.7), Regularizer::elastic_net(0.4, 1.3), Regularizer::nonneg()};
}

}  // namespace

TEST_CASE("soft thresholding example") {
  const Vector z = Eigen::Vector3d(1.0, -0.2, 0.0);
  const Vector w = prox(Regularizer::l1(1.0), z, 0.3);
  CHECK(w(0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(w(1) == 0.0);
  CHECK(w(2) == 0.0);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(w(j) - scalar_prox_oracle(Regularizer::l1(1.0), z(j), 0.3)) < 1e-7);
}

TEST_CASE("zero and indicator prox") {
  const Vector z = Eigen::Vector2d(-1.0, 2.0);
  CHECK(prox(Regularizer::zero(), z, 3.0) == z);
  CHECK(prox(Regularizer::nonneg(), z, 0.1) == Vector(Eigen::Vector2d(0.0, 2.0)));
  CHECK(std::isinf(Regularizer::nonneg().value(z)));
  CHECK(Regularizer::nonneg().value(prox(Regularizer::nonneg(), z, 1.0)) == 0.0);
}

TEST_CASE("prox agrees with a numeric minimizer for every kind") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0), m(0.05, 2.0);
  for (const auto& reg : all_kinds()) {
    for (int i = 0; i < 200; ++i) {
      const double z = u(rng), mu = m(rng);
      Vector x(1);
      x << z;
      const double closed = prox(reg, x, mu)(0), numeric = scalar_prox_oracle(reg, z, mu);
      CHECK(std::abs(closed - numeric) < 1e-7);
      CHECK(prox_objective(reg, closed, z, mu) <= prox_objective(reg, numeric, z, mu) + 1e-15);
    }
  }
}

TEST_CASE("prox is nonexpansive") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> m(0.01, 3.0);
  for (const auto& reg : all_kinds()) {
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 12);
      const Vector a = testing::random_vector(rng, n, 2.0), b = testing::random_vector(rng, n, 2.0);
      const double mu = m(rng);
      CHECK((prox(reg, a, mu) - prox(reg, b, mu)).norm() <= (a - b).norm() * (1 + 1e-15));
    }
  }
}

TEST_CASE("in-place prox matches the copying form") {
  std::mt19937_64 rng(1);
  for (const auto& reg : all_kinds()) {
    Vector z = testing::random_vector(rng, 9);
    const Vector expected = prox(reg, z, 0.4);
    prox_inplace(reg, z, 0.4);
    CHECK(z == expected);
  }
}

TEST_CASE("prox rejects a nonpositive step") {
  CHECK_THROWS_AS(prox(Regularizer::l1(1.0), Vector::Ones(2), 0.0), Error);
  CHECK_THROWS_AS(Regularizer::l1(-1.0), Error);
}

TEST_CASE("subgradient witness") {
  const Vector one = Vector::Constant(1, 1.0);
  CHECK(subgradient_witness(Regularizer::zero(), one, one, 0.5) == 0.0);
  CHECK(subgradient_witness(Regularizer::l1(1.0), Vector::Constant(1, 0.7), one, 0.3) < 1e-14);
  CHECK(subgradient_witness(Regularizer::l1(1.0), Vector::Constant(1, 0.9), one, 0.3) ==
        doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(std::isinf(subgradient_witness(Regularizer::nonneg(), Vector::Constant(1, -1.0), one, 0.3)));

  std::mt19937_64 rng(4);
  for (const auto& reg : all_kinds()) {
    for (int i = 0; i < 100; ++i) {
      const Vector z = testing::random_vector(rng, 6, 2.0);
      CHECK(subgradient_witness(reg, prox(reg, z, 0.6), z, 0.6) < 1e-12);
    }
  }
}
