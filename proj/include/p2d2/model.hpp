#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace p2d2 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Labelled samples, one per row. Labels are +1 / -1.
struct Dataset {
  Matrix features;
  Vector labels;
  bool normalized = false;

  Eigen::Index num_samples() const noexcept { return features.rows(); }
  Eigen::Index dim() const noexcept { return features.cols(); }
};

/// Scales every nonzero row to unit Euclidean norm.
void normalize_rows(Dataset& data);

enum class CostKind { Logistic, Quadratic };

/// Smooth private cost J_k of one agent.
///
///   logistic:  (1/L) sum_l ln(1 + exp(-y_l x_l^T w)) + (lambda/2) |w|^2
///   quadratic: (1/2) w^T Q w - b^T w + (lambda/2) |w|^2
class AgentCost {
 public:
  static AgentCost logistic(Matrix features, Vector labels, double l2_reg);
  static AgentCost quadratic(Matrix q, Vector b, double l2_reg = 0.0);

  CostKind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return dim_; }
  double l2_reg() const noexcept { return l2_reg_; }

  const Matrix& features() const noexcept { return a_; }
  const Vector& labels() const noexcept { return v_; }
  const Matrix& q() const noexcept { return a_; }
  const Vector& b() const noexcept { return v_; }

  double value(const Eigen::Ref<const Vector>& w) const;
  /// Writes grad J_k(w) into `out` (resized as needed).
  void gradient(const Eigen::Ref<const Vector>& w, Vector& out) const;
  Vector gradient(const Eigen::Ref<const Vector>& w) const;

  /// Upper bound on the Hessian (exact for quadratic, sigmoid-curvature 1/4 bound for logistic).
  Matrix hessian_upper() const;
  /// Lower bound on the Hessian used for the strong-convexity constant.
  Matrix hessian_lower() const;

 private:
  AgentCost(CostKind kind, Matrix a, Vector v, double l2_reg);

  CostKind kind_;
  // logistic: features / labels; quadratic: Q / b.
  Matrix a_;
  Vector v_;
  double l2_reg_;
  Eigen::Index dim_;
};

Vector gradient(const AgentCost& cost, const Eigen::Ref<const Vector>& w);

struct CostConstants {
  double delta = 0.0;  ///< Lipschitz constant of every grad J_k
  double nu = 0.0;     ///< strong convexity of the average cost
};

/// Throws NotStronglyConvex when the computed nu is not positive.
CostConstants estimate_constants(std::span<const AgentCost> costs);

/// Lipschitz constant of the average gradient (1/K) sum_k grad J_k.
double average_smoothness(std::span<const AgentCost> costs);

/// (1/K) sum_k J_k(w) and its gradient.
double average_value(std::span<const AgentCost> costs, const Eigen::Ref<const Vector>& w);
Vector average_gradient(std::span<const AgentCost> costs, const Eigen::Ref<const Vector>& w);

/// Shuffled even split into logistic costs; the first (L mod K) agents take one extra sample.
std::vector<AgentCost> partition(const Dataset& data, int num_agents, std::uint64_t seed, double l2_reg);
/// Sample indices assigned to each agent by partition().
std::vector<std::vector<Eigen::Index>> partition_indices(Eigen::Index num_samples, int num_agents,
                                                         std::uint64_t seed);

struct SyntheticLogisticParams {
  int num_agents = 20;
  int samples_per_agent = 100;
  int dim = 50;
  double sparsity = 0.2;  ///< fraction of nonzero entries of the planted model
  double noise = 0.05;    ///< label flip probability
  double l2_reg = 1e-2;
  std::uint64_t seed = 0;
};

struct SyntheticLogistic {
  std::vector<AgentCost> costs;
  Dataset dataset;   ///< all samples, agent blocks stacked in order
  Vector planted_w;
};

SyntheticLogistic synthesize_logistic(const SyntheticLogisticParams& params);

/// Random quadratics whose individual Q_k are rank deficient (rank ceil(M/2))
/// while their average is positive definite with high probability.
std::vector<AgentCost> synthesize_quadratic(int num_agents, int dim, std::uint64_t seed, double l2_reg = 0.0);

struct LibsvmOptions {
  /// Labels listed here map to -1, everything else to +1. When empty, labels <= 0 map to -1.
  std::vector<double> negative_labels;
  /// Keep only samples whose label is in this set (class selection). Empty keeps everything.
  std::vector<double> keep_labels;
  /// Feature dimension; 0 infers the largest index seen.
  int num_features = 0;
  bool normalize = true;
};

/// Parses "label index:value ..." lines with 1-based indices. Throws ParseError with the line number.
Dataset read_libsvm(const std::string& path, const LibsvmOptions& options = {});
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {}, const std::string& source = "<input>");

}  // namespace p2d2
