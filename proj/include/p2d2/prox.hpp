#pragma once

#include <string>

#include <Eigen/Dense>

namespace p2d2 {

using Vector = Eigen::VectorXd;

enum class RegularizerKind { Zero, L1, ElasticNet, NonnegIndicator };

/// The nonsmooth term R shared by every agent.
///
///   zero:        R(w) = 0
///   l1:          R(w) = rho1 |w|_1
///   elastic_net: R(w) = rho1 |w|_1 + (rho2 / 2) |w|^2
///   nonneg:      R(w) = indicator of { w >= 0 }
struct Regularizer {
  RegularizerKind kind = RegularizerKind::Zero;
  double rho1 = 0.0;
  double rho2 = 0.0;

  static Regularizer zero() { return {}; }
  static Regularizer l1(double rho);
  static Regularizer elastic_net(double rho1, double rho2);
  static Regularizer nonneg() { return {RegularizerKind::NonnegIndicator, 0.0, 0.0}; }

  bool is_zero() const noexcept { return kind == RegularizerKind::Zero; }
  /// +infinity outside the domain of the indicator.
  double value(const Eigen::Ref<const Vector>& w) const;
};

std::string to_string(RegularizerKind kind);

/// argmin_v R(v) + |v - z|^2 / (2 mu). Elastic net shrinks by mu*rho1 then scales by 1/(1 + mu*rho2).
Vector prox(const Regularizer& reg, const Eigen::Ref<const Vector>& z, double mu);
/// In-place variant on a contiguous buffer.
void prox_inplace(const Regularizer& reg, Eigen::Ref<Vector> z, double mu);

/// Distance from (z - w)/mu to the subdifferential of R at w; zero certifies w = prox(z).
double subgradient_witness(const Regularizer& reg, const Eigen::Ref<const Vector>& w,
                           const Eigen::Ref<const Vector>& z, double mu);

}  // namespace p2d2
