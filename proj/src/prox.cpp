#include "p2d2/prox.hpp"

#include <cmath>
#include <limits>

#include "p2d2/error.hpp"

namespace p2d2 {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Distance from g to rho * d|w| in one coordinate.
double l1_gap(double g, double w, double rho) {
  if (w > 0.0) return std::abs(g - rho);
  if (w < 0.0) return std::abs(g + rho);
  return std::max(0.0, std::abs(g) - rho);
}

void check_param(double p, const char* name) {
  if (!(p >= 0.0) || !std::isfinite(p))
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be a finite nonnegative number");
}

}  // namespace

Regularizer Regularizer::l1(double rho) {
  check_param(rho, "rho");
  return {RegularizerKind::L1, rho, 0.0};
}

Regularizer Regularizer::elastic_net(double rho1, double rho2) {
  check_param(rho1, "rho1");
  check_param(rho2, "rho2");
  return {RegularizerKind::ElasticNet, rho1, rho2};
}

double Regularizer::value(const Eigen::Ref<const Vector>& w) const {
  switch (kind) {
    case RegularizerKind::Zero: return 0.0;
    case RegularizerKind::L1: return rho1 * w.lpNorm<1>();
    case RegularizerKind::ElasticNet: return rho1 * w.lpNorm<1>() + 0.5 * rho2 * w.squaredNorm();
    case RegularizerKind::NonnegIndicator:
      return (w.array() >= 0.0).all() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Zero: return "zero";
    case RegularizerKind::L1: return "l1";
    case RegularizerKind::ElasticNet: return "elastic_net";
    case RegularizerKind::NonnegIndicator: return "nonneg";
  }
  return "unknown";
}

void prox_inplace(const Regularizer& reg, Eigen::Ref<Vector> z, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidParameter, "prox step mu must be positive");
  switch (reg.kind) {
    case RegularizerKind::Zero: return;
    case RegularizerKind::L1: {
      const double t = mu * reg.rho1;
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = soft_threshold(z[i], t);
      return;
    }
    case RegularizerKind::ElasticNet: {
      const double t = mu * reg.rho1;
      const double scale = 1.0 / (1.0 + mu * reg.rho2);
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = soft_threshold(z[i], t) * scale;
      return;
    }
    case RegularizerKind::NonnegIndicator:
      z = z.cwiseMax(0.0);
      return;
  }
}

Vector prox(const Regularizer& reg, const Eigen::Ref<const Vector>& z, double mu) {
  Vector out = z;
  prox_inplace(reg, out, mu);
  return out;
}

double subgradient_witness(const Regularizer& reg, const Eigen::Ref<const Vector>& w,
                           const Eigen::Ref<const Vector>& z, double mu) {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidParameter, "prox step mu must be positive");
  if (w.size() != z.size()) throw Error(ErrorCode::DimensionMismatch, "w and z differ in length");
  const Vector g = (z - w) / mu;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double gap = 0.0;
    switch (reg.kind) {
      case RegularizerKind::Zero: gap = std::abs(g[i]); break;
      case RegularizerKind::L1: gap = l1_gap(g[i], w[i], reg.rho1); break;
      case RegularizerKind::ElasticNet: gap = l1_gap(g[i] - reg.rho2 * w[i], w[i], reg.rho1); break;
      case RegularizerKind::NonnegIndicator:
        if (w[i] < 0.0) return std::numeric_limits<double>::infinity();
        gap = w[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, g[i]);
        break;
    }
    sq += gap * gap;
  }
  return std::sqrt(sq);
}

}  // namespace p2d2
