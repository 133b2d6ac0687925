#include "p2d2/analysis.hpp"

#include <cmath>
#include <cstdio>

#include "p2d2/error.hpp"

namespace p2d2 {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be positive and finite");
}

}  // namespace

double nu_rho(double nu, double delta, double sigma_under, double rho, double c) {
  require_positive(nu, "nu");
  require_positive(delta, "delta");
  require_positive(sigma_under, "sigma_under");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidRho, "rho must be positive");
  const double c_max = nu / (2.0 * delta);
  if (!(c > 0.0 && c < c_max))
    throw Error(ErrorCode::InvalidC, "c = " + fmt(c) + " outside (0, nu/(2 delta)) = (0, " + fmt(c_max) + ")");
  const double c2 = c * c;
  return std::min(nu - 2.0 * delta * c, rho * sigma_under * c2 / (4.0 * (c2 + 1.0)));
}

NuRhoOptimum optimize_nu_rho(double nu, double delta, double sigma_under, double rho) {
  require_positive(nu, "nu");
  require_positive(delta, "delta");
  require_positive(sigma_under, "sigma_under");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidRho, "rho must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = nu / (2.0 * delta);
  auto f = [&](double c) { return nu_rho(nu, delta, sigma_under, rho, c); };
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  NuRhoOptimum out;
  out.c = f1 >= f2 ? x1 : x2;
  out.nu_rho = std::max(f1, f2);
  return out;
}

double max_rho(double mu, double delta, double sigma_max) {
  require_positive(mu, "mu");
  require_positive(delta, "delta");
  const double slack = 1.0 - sigma_max - mu * delta;
  if (!(slack > 0.0))
    throw Error(ErrorCode::StepTooLarge, "mu = " + fmt(mu) + " is not below (1 - sigma_max)/delta = " +
                                             fmt((1.0 - sigma_max) / delta));
  return slack / (mu * (2.0 - sigma_max - mu * delta));
}

StepSizes step_size_defaults(const CostConstants& constants, const SpectralBounds& spectrum, double safety) {
  if (!(safety > 0.0 && safety < 1.0)) throw Error(ErrorCode::InvalidParameter, "safety must lie in (0, 1)");
  StepSizes s;
  s.mu = safety * (1.0 - spectrum.sigma_max) / constants.delta;
  s.rho = max_rho(s.mu, constants.delta, spectrum.sigma_max);
  const auto opt = optimize_nu_rho(constants.nu, constants.delta, spectrum.sigma_under, s.rho);
  s.c = opt.c;
  s.nu_rho = opt.nu_rho;
  s.alpha = std::min(1.0, s.mu * s.nu_rho * (2.0 - spectrum.sigma_max - s.mu * constants.delta));
  return s;
}

std::vector<std::pair<std::string, std::string>> RateCertificate::entries() const {
  return {{"mu", fmt(mu)},         {"alpha", fmt(alpha)},   {"rho", fmt(rho)},
          {"c", fmt(c)},           {"nu_rho", fmt(nu_rho)}, {"gamma1", fmt(gamma1)},
          {"gamma2", fmt(gamma2)}, {"beta", fmt(beta)},     {"gamma", fmt(gamma)},
          {"r_is_zero", r_is_zero ? "true" : "false"},      {"classical_step_scale", fmt(classical_step_scale)}};
}

std::vector<std::string> step_condition_violations(double mu, double alpha, double rho, double c,
                                                   const CostConstants& constants, const SpectralBounds& spectrum,
                                                   bool r_is_zero) {
  std::vector<std::string> out;
  const double mu_bound = (1.0 - spectrum.sigma_max) / constants.delta;
  if (!(mu > 0.0 && mu < mu_bound))
    out.push_back("mu < (1 - sigma_max)/delta violated: mu = " + fmt(mu) + ", bound = " + fmt(mu_bound));
  if (!(alpha > 0.0 && alpha <= 1.0)) out.push_back("alpha <= 1 violated: alpha = " + fmt(alpha));
  if (!out.empty()) return out;

  const double rho_bound = max_rho(mu, constants.delta, spectrum.sigma_max);
  if (!(rho > 0.0 && rho <= rho_bound))
    out.push_back("0 < rho <= (1 - sigma_max - mu delta)/(mu (2 - sigma_max - mu delta)) violated: rho = " +
                  fmt(rho) + ", bound = " + fmt(rho_bound));
  const double c_bound = constants.nu / (2.0 * constants.delta);
  if (!(c > 0.0 && c < c_bound))
    out.push_back("c in (0, nu/(2 delta)) violated: c = " + fmt(c) + ", bound = " + fmt(c_bound));
  if (!out.empty() || r_is_zero) return out;

  const double nr = nu_rho(constants.nu, constants.delta, spectrum.sigma_under, rho, c);
  const double alpha_bound = mu * nr * (2.0 - spectrum.sigma_max - mu * constants.delta);
  if (alpha > alpha_bound * (1.0 + 1e-12))
    out.push_back("alpha <= mu nu_rho (2 - sigma_max - mu delta) violated: alpha = " + fmt(alpha) +
                  ", bound = " + fmt(alpha_bound));
  return out;
}

RateCertificate rate_certificate(double mu, double alpha, double rho, double c, const CostConstants& constants,
                                 const SpectralBounds& spectrum, bool r_is_zero) {
  const auto violations = step_condition_violations(mu, alpha, rho, c, constants, spectrum, r_is_zero);
  if (!violations.empty()) throw Error(ErrorCode::CertificateUnavailable, violations.front());

  RateCertificate cert;
  cert.mu = mu;
  cert.alpha = alpha;
  cert.rho = rho;
  cert.c = c;
  cert.r_is_zero = r_is_zero;
  cert.nu_rho = nu_rho(constants.nu, constants.delta, spectrum.sigma_under, rho, c);
  cert.gamma1 = 1.0 - mu * cert.nu_rho * (2.0 - spectrum.sigma_max - mu * constants.delta);
  cert.gamma2 = 1.0 - alpha * spectrum.sigma_under;
  cert.beta = 1.0 - alpha * spectrum.sigma_max;
  cert.gamma = r_is_zero ? std::max(cert.gamma1, cert.gamma2) : std::max(cert.gamma1 / cert.beta, cert.gamma2);
  cert.classical_step_scale = cert.nu_rho * (1.0 - spectrum.sigma_max) / (constants.delta * constants.delta);
  if (!(cert.gamma < 1.0))
    throw Error(ErrorCode::CertificateUnavailable, "contraction factor gamma = " + fmt(cert.gamma) + " is not below 1");
  return cert;
}

Matrix min_norm_dual(const ConsensusMatrix& b, const Matrix& rhs) { return b.sqrt_pinv() * rhs; }

FixedPointReport fixed_point_residual(const Matrix& w, const Matrix& z, const std::optional<Matrix>& y,
                                      std::span<const AgentCost> costs, const Regularizer& reg,
                                      const ConsensusMatrix& b, double mu) {
  if (w.rows() != z.rows() || w.cols() != z.cols() || w.rows() != b.num_agents())
    throw Error(ErrorCode::DimensionMismatch, "W, Z and B disagree in shape");
  const Matrix& bm = b.matrix();
  const Matrix& root = b.sqrt();
  // mu grad J_mu(W) = mu grad J(W) + B W
  const Matrix scaled_grad = mu * stacked_gradient(costs, w) + bm * w;
  const Matrix dual = y ? *y : min_norm_dual(b, w - z - scaled_grad);

  FixedPointReport r;
  r.residual_a = (z - w + scaled_grad + root * dual).norm();
  r.residual_b = (root * z).norm();
  double sq = 0.0;
  for (Eigen::Index k = 0; k < z.rows(); ++k)
    sq += (w.row(k).transpose() - prox(reg, z.row(k).transpose(), mu)).squaredNorm();
  r.residual_c = std::sqrt(sq);
  for (Eigen::Index s = 0; s < z.rows(); ++s)
    for (Eigen::Index k = s + 1; k < z.rows(); ++k) r.z_spread = std::max(r.z_spread, (z.row(s) - z.row(k)).norm());
  return r;
}

FixedPoint construct_fixed_point(std::span<const AgentCost> costs, const ConsensusMatrix& b, double mu,
                                 const IstaResult& optimum) {
  const int k = b.num_agents();
  if (static_cast<int>(costs.size()) != k) throw Error(ErrorCode::DimensionMismatch, "one cost per agent required");
  FixedPoint fp;
  fp.w = Vector::Ones(k) * optimum.w_star.transpose();
  fp.z = Vector::Ones(k) * (mu * optimum.r_star + optimum.w_star).transpose();
  const Matrix rhs = fp.w - fp.z - mu * stacked_gradient(costs, fp.w) - b.matrix() * fp.w;
  fp.y = min_norm_dual(b, rhs);
  return fp;
}

double weighted_sq_norm(const Matrix& x, const ConsensusMatrix& b, double alpha) {
  return x.squaredNorm() - alpha * (x.transpose() * b.matrix() * x).trace();
}

double lyapunov_general(const SolverState& s, const FixedPoint& fp, double alpha, double beta) {
  return (s.w - fp.w).squaredNorm() + (s.y - fp.y).squaredNorm() / (alpha * beta);
}

double lyapunov_smooth(const SolverState& s, const FixedPoint& fp, const ConsensusMatrix& b, double alpha) {
  return weighted_sq_norm(s.w - fp.w, b, alpha) + (s.y - fp.y).squaredNorm() / alpha;
}

RateFit fit_linear_rate(std::span<const double> errors, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "tail fraction must lie in (0, 1]");
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i] > kRateFitFloor && std::isfinite(errors[i]))
      points.emplace_back(static_cast<double>(i), std::log(errors[i]));
  if (points.size() < 10)
    throw Error(ErrorCode::InsufficientData,
                std::to_string(points.size()) + " records above the error floor, need at least 10");
  const std::size_t window = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(points.size()))));
  const auto first = points.end() - static_cast<std::ptrdiff_t>(window);

  double mx = 0.0;
  double my = 0.0;
  for (auto it = first; it != points.end(); ++it) {
    mx += it->first;
    my += it->second;
  }
  mx /= static_cast<double>(window);
  my /= static_cast<double>(window);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (auto it = first; it != points.end(); ++it) {
    const double dx = it->first - mx;
    const double dy = it->second - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.points = static_cast<int>(window);
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.gamma_hat = std::exp(slope);
  fit.c_hat = std::exp(my - slope * mx);
  const double ss_res = std::max(0.0, syy - slope * sxy);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

RateFit fit_linear_rate(const IterationTrace& trace, double tail_fraction) {
  // Iteration numbers are contiguous from 0, so the record index is the iteration.
  std::vector<double> errors;
  errors.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    if (!r.rel_sq_error) throw Error(ErrorCode::InsufficientData, "trace has no relative squared error column");
    errors.push_back(*r.rel_sq_error);
  }
  return fit_linear_rate(errors, tail_fraction);
}

}  // namespace p2d2
