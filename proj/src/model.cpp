#include "p2d2/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "p2d2/error.hpp"
#include "p2d2/random.hpp"

namespace p2d2 {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double largest_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigendecomposition failed");
  return eig.eigenvalues().maxCoeff();
}

double smallest_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigendecomposition failed");
  return eig.eigenvalues().minCoeff();
}

void check_dim(const AgentCost& cost, Eigen::Index n) {
  if (n != cost.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "expected vector of length " + std::to_string(cost.dim()) + ", got " + std::to_string(n));
}

}  // namespace

void normalize_rows(Dataset& data) {
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    const double norm = data.features.row(i).norm();
    if (norm > 0.0) data.features.row(i) /= norm;
  }
  data.normalized = true;
}

AgentCost::AgentCost(CostKind kind, Matrix a, Vector v, double l2_reg)
    : kind_(kind), a_(std::move(a)), v_(std::move(v)), l2_reg_(l2_reg), dim_(a_.cols()) {
  if (!(l2_reg_ >= 0.0) || !std::isfinite(l2_reg_))
    throw Error(ErrorCode::InvalidParameter, "l2 regularization must be a finite nonnegative number");
  if (!a_.allFinite() || !v_.allFinite()) throw Error(ErrorCode::InvalidParameter, "non-finite cost data");
}

AgentCost AgentCost::logistic(Matrix features, Vector labels, double l2_reg) {
  if (features.rows() != labels.size())
    throw Error(ErrorCode::DimensionMismatch, "feature rows and label count differ");
  if (features.rows() == 0) throw Error(ErrorCode::TooFewSamples, "logistic cost needs at least one sample");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw Error(ErrorCode::InvalidParameter, "labels must be +1 or -1");
  return AgentCost(CostKind::Logistic, std::move(features), std::move(labels), l2_reg);
}

AgentCost AgentCost::quadratic(Matrix q, Vector b, double l2_reg) {
  if (q.rows() != q.cols() || q.rows() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "quadratic needs square Q matching b");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidParameter, "Q must be symmetric");
  if (q.rows() > 0 && smallest_eigenvalue(q) < -1e-10 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidParameter, "Q must be positive semidefinite");
  return AgentCost(CostKind::Quadratic, std::move(q), std::move(b), l2_reg);
}

double AgentCost::value(const Eigen::Ref<const Vector>& w) const {
  check_dim(*this, w.size());
  double out = 0.5 * l2_reg_ * w.squaredNorm();
  if (kind_ == CostKind::Quadratic) return out + 0.5 * w.dot(a_ * w) - v_.dot(w);
  const Vector margins = v_.cwiseProduct(a_ * w);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) sum += softplus(-margins[i]);
  return out + sum / static_cast<double>(margins.size());
}

void AgentCost::gradient(const Eigen::Ref<const Vector>& w, Vector& out) const {
  check_dim(*this, w.size());
  if (kind_ == CostKind::Quadratic) {
    out.noalias() = a_ * w;
    out -= v_;
    out += l2_reg_ * w;
    return;
  }
  Vector weights = a_ * w;
  const double inv_l = 1.0 / static_cast<double>(weights.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) weights[i] = -v_[i] * sigmoid(-v_[i] * weights[i]) * inv_l;
  out.noalias() = a_.transpose() * weights;
  out += l2_reg_ * w;
}

Vector AgentCost::gradient(const Eigen::Ref<const Vector>& w) const {
  Vector out(dim_);
  gradient(w, out);
  return out;
}

Matrix AgentCost::hessian_upper() const {
  Matrix h = kind_ == CostKind::Quadratic
                 ? a_
                 : Matrix(a_.transpose() * a_ / (4.0 * static_cast<double>(a_.rows())));
  h.diagonal().array() += l2_reg_;
  return h;
}

Matrix AgentCost::hessian_lower() const {
  Matrix h = kind_ == CostKind::Quadratic ? a_ : Matrix::Zero(dim_, dim_);
  h.diagonal().array() += l2_reg_;
  return h;
}

Vector gradient(const AgentCost& cost, const Eigen::Ref<const Vector>& w) { return cost.gradient(w); }

CostConstants estimate_constants(std::span<const AgentCost> costs) {
  if (costs.empty()) throw Error(ErrorCode::InvalidParameter, "no costs given");
  const auto m = costs.front().dim();
  CostConstants out;
  Matrix lower_avg = Matrix::Zero(m, m);
  for (const auto& c : costs) {
    if (c.dim() != m) throw Error(ErrorCode::DimensionMismatch, "agents disagree on dimension");
    out.delta = std::max(out.delta, largest_eigenvalue(c.hessian_upper()));
    lower_avg += c.hessian_lower();
  }
  lower_avg /= static_cast<double>(costs.size());
  out.nu = smallest_eigenvalue(lower_avg);
  if (!(out.nu > 0.0))
    throw Error(ErrorCode::NotStronglyConvex,
                "average cost is not strongly convex (nu = " + std::to_string(out.nu) + ")");
  out.nu = std::min(out.nu, out.delta);
  return out;
}

double average_smoothness(std::span<const AgentCost> costs) {
  if (costs.empty()) throw Error(ErrorCode::InvalidParameter, "no costs given");
  const auto m = costs.front().dim();
  Matrix upper = Matrix::Zero(m, m);
  for (const auto& c : costs) upper += c.hessian_upper();
  return largest_eigenvalue(upper / static_cast<double>(costs.size()));
}

double average_value(std::span<const AgentCost> costs, const Eigen::Ref<const Vector>& w) {
  double sum = 0.0;
  for (const auto& c : costs) sum += c.value(w);
  return sum / static_cast<double>(costs.size());
}

Vector average_gradient(std::span<const AgentCost> costs, const Eigen::Ref<const Vector>& w) {
  Vector sum = Vector::Zero(w.size());
  Vector g(w.size());
  for (const auto& c : costs) {
    c.gradient(w, g);
    sum += g;
  }
  return sum / static_cast<double>(costs.size());
}

std::vector<std::vector<Eigen::Index>> partition_indices(Eigen::Index num_samples, int num_agents,
                                                         std::uint64_t seed) {
  if (num_agents < 1) throw Error(ErrorCode::InvalidParameter, "need at least one agent");
  if (num_samples < num_agents)
    throw Error(ErrorCode::TooFewSamples, std::to_string(num_samples) + " samples for " +
                                              std::to_string(num_agents) + " agents");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(num_samples));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::Index base = num_samples / num_agents;
  const Eigen::Index extra = num_samples % num_agents;
  std::vector<std::vector<Eigen::Index>> out(num_agents);
  auto it = order.begin();
  for (int k = 0; k < num_agents; ++k) {
    const auto n = base + (k < extra ? 1 : 0);
    out[k].assign(it, it + n);
    it += n;
  }
  return out;
}

std::vector<AgentCost> partition(const Dataset& data, int num_agents, std::uint64_t seed, double l2_reg) {
  const auto blocks = partition_indices(data.num_samples(), num_agents, seed);
  std::vector<AgentCost> out;
  out.reserve(blocks.size());
  for (const auto& idx : blocks) {
    Matrix x(static_cast<Eigen::Index>(idx.size()), data.dim());
    Vector y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = data.features.row(idx[i]);
      y[static_cast<Eigen::Index>(i)] = data.labels[idx[i]];
    }
    out.push_back(AgentCost::logistic(std::move(x), std::move(y), l2_reg));
  }
  return out;
}

SyntheticLogistic synthesize_logistic(const SyntheticLogisticParams& p) {
  if (p.num_agents < 1 || p.samples_per_agent < 1 || p.dim < 1)
    throw Error(ErrorCode::InvalidParameter, "synthetic dimensions must be positive");
  if (!(p.sparsity > 0.0 && p.sparsity <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "sparsity must lie in (0, 1]");
  if (!(p.noise >= 0.0 && p.noise <= 0.5)) throw Error(ErrorCode::InvalidParameter, "noise must lie in [0, 0.5]");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SyntheticLogistic out;
  out.planted_w = Vector::Zero(p.dim);
  const int nnz = std::max(1, static_cast<int>(std::lround(p.sparsity * p.dim)));
  std::vector<int> support(p.dim);
  std::iota(support.begin(), support.end(), 0);
  std::shuffle(support.begin(), support.end(), rng);
  for (int j = 0; j < nnz; ++j) out.planted_w[support[j]] = gauss(rng);

  const Eigen::Index total = static_cast<Eigen::Index>(p.num_agents) * p.samples_per_agent;
  out.dataset.features.resize(total, p.dim);
  out.dataset.labels.resize(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    for (int j = 0; j < p.dim; ++j) out.dataset.features(i, j) = gauss(rng);
    const double label = out.dataset.features.row(i).dot(out.planted_w) >= 0.0 ? 1.0 : -1.0;
    const bool flip = unif(rng) < p.noise;
    out.dataset.labels[i] = flip ? -label : label;
  }
  normalize_rows(out.dataset);

  out.costs.reserve(p.num_agents);
  for (int k = 0; k < p.num_agents; ++k) {
    const Eigen::Index start = static_cast<Eigen::Index>(k) * p.samples_per_agent;
    out.costs.push_back(AgentCost::logistic(out.dataset.features.middleRows(start, p.samples_per_agent),
                                            out.dataset.labels.segment(start, p.samples_per_agent), p.l2_reg));
  }
  return out;
}

std::vector<AgentCost> synthesize_quadratic(int num_agents, int dim, std::uint64_t seed, double l2_reg) {
  if (num_agents < 1 || dim < 1) throw Error(ErrorCode::InvalidParameter, "synthetic dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int rank = (dim + 1) / 2;
  std::vector<AgentCost> out;
  out.reserve(num_agents);
  for (int k = 0; k < num_agents; ++k) {
    Matrix x(rank, dim);
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < dim; ++j) x(i, j) = gauss(rng);
    Vector b(dim);
    for (int j = 0; j < dim; ++j) b[j] = gauss(rng);
    Matrix q = x.transpose() * x / static_cast<double>(rank);
    q = 0.5 * (q + q.transpose());
    out.push_back(AgentCost::quadratic(std::move(q), std::move(b), l2_reg));
  }
  return out;
}

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options, const std::string& source) {
  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    Row row;
    try {
      std::size_t used = 0;
      row.label = std::stod(token, &used);
      if (used != token.size()) fail("bad label '" + token + "'");
    } catch (const std::logic_error&) {
      fail("bad label '" + token + "'");
    }
    int last = 0;
    while (ss >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) fail("expected index:value, got '" + token + "'");
      int index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        index = std::stoi(token.substr(0, colon), &used);
        if (used != colon) fail("bad index in '" + token + "'");
        const std::string val = token.substr(colon + 1);
        value = std::stod(val, &used);
        if (used != val.size()) fail("bad value in '" + token + "'");
      } catch (const std::logic_error&) {
        fail("bad entry '" + token + "'");
      }
      if (index < 1) fail("indices are 1-based, got " + std::to_string(index));
      if (index <= last) fail("indices must be strictly increasing");
      if (!std::isfinite(value)) fail("non-finite value");
      last = index;
      max_index = std::max(max_index, index);
      row.entries.emplace_back(index, value);
    }
    if (!options.keep_labels.empty() &&
        std::find(options.keep_labels.begin(), options.keep_labels.end(), row.label) == options.keep_labels.end())
      continue;
    rows.push_back(std::move(row));
  }
  const int dim = options.num_features > 0 ? options.num_features : max_index;
  if (max_index > dim)
    throw Error(ErrorCode::ParseError, source + ": feature index " + std::to_string(max_index) +
                                           " exceeds num_features " + std::to_string(dim));

  Dataset out;
  out.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), dim);
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (const auto& [index, value] : rows[i].entries) out.features(r, index - 1) = value;
    const double label = rows[i].label;
    bool negative = options.negative_labels.empty()
                        ? label <= 0.0
                        : std::find(options.negative_labels.begin(), options.negative_labels.end(), label) !=
                              options.negative_labels.end();
    out.labels[r] = negative ? -1.0 : 1.0;
  }
  if (options.normalize) normalize_rows(out);
  return out;
}

Dataset read_libsvm(const std::string& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return parse_libsvm(in, options, path);
}

}  // namespace p2d2
