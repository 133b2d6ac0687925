#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "p2d2/model.hpp"
#include "p2d2/prox.hpp"
#include "p2d2/solver.hpp"
#include "p2d2/topology.hpp"
#include "p2d2/trace.hpp"

namespace p2d2 {

/// Restricted strong-convexity constant of J + (rho/2)|w|_B^2 around the minimizer:
///   min{ nu - 2 delta c,  rho sigma_under c^2 / (4 (c^2 + 1)) },  c in (0, nu / (2 delta)).
double nu_rho(double nu, double delta, double sigma_under, double rho, double c);

struct NuRhoOptimum {
  double c = 0.0;
  double nu_rho = 0.0;
};

/// Golden-section search over c. The first branch decreases and the second
/// increases in c, so the objective is unimodal.
NuRhoOptimum optimize_nu_rho(double nu, double delta, double sigma_under, double rho);

/// Largest admissible penalty rho for a primal step mu:
///   (1 - sigma_max - mu delta) / (mu (2 - sigma_max - mu delta)).
double max_rho(double mu, double delta, double sigma_max);

struct StepSizes {
  double mu = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double c = 0.0;
  double nu_rho = 0.0;
};

/// mu = safety (1 - sigma_max) / delta, rho at its maximum, c optimized,
/// alpha = min{1, mu nu_rho (2 - sigma_max - mu delta)}.
StepSizes step_size_defaults(const CostConstants& constants, const SpectralBounds& spectrum, double safety = 0.5);

struct RateCertificate {
  double mu = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double c = 0.0;
  double nu_rho = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool r_is_zero = false;
  /// Scale of the classical EXTRA step bound nu_rho (1 - sigma_max) / delta^2, for comparison.
  double classical_step_scale = 0.0;

  /// key=value pairs in a fixed order, for printing and trace headers.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Violated step-size clauses, empty when the certificate applies.
std::vector<std::string> step_condition_violations(double mu, double alpha, double rho, double c,
                                                   const CostConstants& constants, const SpectralBounds& spectrum,
                                                   bool r_is_zero);

/// gamma = max{gamma1 / beta, gamma2} in general and max{gamma1, gamma2} when R = 0.
/// Throws CertificateUnavailable naming the violated clause.
RateCertificate rate_certificate(double mu, double alpha, double rho, double c, const CostConstants& constants,
                                 const SpectralBounds& spectrum, bool r_is_zero);

struct FixedPointReport {
  double residual_a = 0.0;  ///< |Z - W + mu grad J_mu(W) + B^{1/2} Y|
  double residual_b = 0.0;  ///< |B^{1/2} Z|
  double residual_c = 0.0;  ///< |W - prox(Z)|
  double z_spread = 0.0;    ///< max pairwise distance between rows of Z
};

/// Minimum-norm least-squares solution Y of B^{1/2} Y = rhs (lies in range(B^{1/2})).
Matrix min_norm_dual(const ConsensusMatrix& b, const Matrix& rhs);

/// When `y` is absent the least-squares dual is used.
FixedPointReport fixed_point_residual(const Matrix& w, const Matrix& z, const std::optional<Matrix>& y,
                                      std::span<const AgentCost> costs, const Regularizer& reg,
                                      const ConsensusMatrix& b, double mu);

struct FixedPoint {
  Matrix w;
  Matrix z;
  Matrix y;
};

/// W = 1 (x) w*, Z = 1 (x) (mu r* + w*), Y from min_norm_dual on the primal equation.
FixedPoint construct_fixed_point(std::span<const AgentCost> costs, const ConsensusMatrix& b, double mu,
                                 const IstaResult& optimum);

/// |X|_Q^2 with Q = (I - alpha B) (x) I_M.
double weighted_sq_norm(const Matrix& x, const ConsensusMatrix& b, double alpha);

/// |W - W*|^2 + |Y - Y*|^2 / (alpha beta).
double lyapunov_general(const SolverState& s, const FixedPoint& fp, double alpha, double beta);
/// |W - W*|_Q^2 + |Y - Y*|^2 / alpha.
double lyapunov_smooth(const SolverState& s, const FixedPoint& fp, const ConsensusMatrix& b, double alpha);

/// error_i ~ c_hat * gamma_hat^i over the fitted window.
struct RateFit {
  double gamma_hat = 1.0;
  double c_hat = 1.0;
  double r_squared = 1.0;
  int points = 0;
};

inline constexpr double kRateFitFloor = 1e-14;

/// Least-squares slope of log(error) against iteration over the tail of the
/// records whose error exceeds the floor. Throws InsufficientData below 10 points.
RateFit fit_linear_rate(const IterationTrace& trace, double tail_fraction = 0.5);
RateFit fit_linear_rate(std::span<const double> errors, double tail_fraction = 0.5);

}  // namespace p2d2
