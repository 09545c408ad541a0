#include "fairsteer/distribution.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fairsteer/error.hpp"

namespace fairsteer {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WeightsMismatch: return "WeightsMismatch";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::NonPositiveFeature: return "NonPositiveFeature";
    case ErrorCode::DegenerateCost: return "DegenerateCost";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NegativeKL: return "NegativeKL";
    case ErrorCode::WeightRatioViolation: return "WeightRatioViolation";
    case ErrorCode::DegenerateStd: return "DegenerateStd";
    case ErrorCode::SearchDiverged: return "SearchDiverged";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

SubgroupGaussian::SubgroupGaussian(double mean, double stddev)
    : mean_(Eigen::VectorXd::Constant(1, mean)), cov_(Eigen::MatrixXd::Constant(1, 1, stddev * stddev)) {
  if (!(stddev > 0.0) || !std::isfinite(stddev) || !std::isfinite(mean)) {
    throw Error(ErrorCode::InvalidArgument, "subgroup std must be finite and > 0, got " + std::to_string(stddev));
  }
}

SubgroupGaussian::SubgroupGaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "subgroup mean must be non-empty");
  if (cov_.rows() != d || cov_.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "covariance shape does not match mean dimension");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite subgroup parameters");
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::InvalidArgument, "covariance must be symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose());
  if (d == 1) {
    if (!(cov_(0, 0) > 0.0)) throw Error(ErrorCode::InvalidArgument, "subgroup variance must be > 0");
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= kEpsPd) {
    throw Error(ErrorCode::SingularCovariance, "covariance is not positive definite (min eigenvalue " +
                                                   std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
}

double SubgroupGaussian::mean() const {
  if (!is_univariate()) throw Error(ErrorCode::InvalidArgument, "mean() on a multivariate subgroup");
  return mean_(0);
}

double SubgroupGaussian::stddev() const { return std::sqrt(variance()); }

double SubgroupGaussian::variance() const {
  if (!is_univariate()) throw Error(ErrorCode::InvalidArgument, "variance() on a multivariate subgroup");
  return cov_(0, 0);
}

JointWeights::JointWeights(Eigen::MatrixXd q) : q_(std::move(q)) {
  if (q_.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty weight table");
  if (!q_.allFinite() || q_.minCoeff() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "all joint weights must be finite and > 0");
  }
  const double total = q_.sum();
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::InvalidArgument, "joint weights must sum to 1 (sum = " + std::to_string(total) + ")");
  }
}

JointWeights JointWeights::normalized(const Eigen::MatrixXd& unnormalized) {
  if (unnormalized.size() == 0 || unnormalized.minCoeff() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "weights to normalize must be > 0");
  }
  return JointWeights(unnormalized / unnormalized.sum());
}

JointWeights JointWeights::uniform(std::size_t classes, std::size_t groups) {
  const auto r = static_cast<Eigen::Index>(classes);
  const auto c = static_cast<Eigen::Index>(groups);
  return JointWeights(Eigen::MatrixXd::Constant(r, c, 1.0 / static_cast<double>(classes * groups)));
}

double JointWeights::max_abs_diff(const JointWeights& other) const {
  if (other.q_.rows() != q_.rows() || other.q_.cols() != q_.cols()) {
    throw Error(ErrorCode::KeyMismatch, "weight tables have different shapes");
  }
  return (q_ - other.q_).cwiseAbs().maxCoeff();
}

namespace {

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return names;
}

}  // namespace

FairDistribution::FairDistribution(JointWeights weights, std::vector<SubgroupGaussian> subgroups,
                                   std::vector<std::string> class_names, std::vector<std::string> group_names)
    : weights_(std::move(weights)),
      subgroups_(std::move(subgroups)),
      class_names_(std::move(class_names)),
      group_names_(std::move(group_names)) {
  const std::size_t cells = num_classes() * num_groups();
  if (subgroups_.size() != cells) {
    throw Error(ErrorCode::KeyMismatch, "expected " + std::to_string(cells) + " subgroups, got " +
                                            std::to_string(subgroups_.size()));
  }
  const std::size_t d = subgroups_.front().dim();
  for (const auto& g : subgroups_) {
    if (g.dim() != d) throw Error(ErrorCode::DimensionMismatch, "subgroups have different dimensions");
  }
  if (class_names_.empty()) class_names_ = default_names(num_classes());
  if (group_names_.empty()) group_names_ = default_names(num_groups());
  if (class_names_.size() != num_classes() || group_names_.size() != num_groups()) {
    throw Error(ErrorCode::KeyMismatch, "class/group name lists do not match the weight table");
  }
}

FairDistribution FairDistribution::binary_univariate(const std::array<double, 4>& means,
                                                     const std::array<double, 4>& stds,
                                                     const std::array<double, 4>& q) {
  Eigen::MatrixXd table(2, 2);
  std::vector<SubgroupGaussian> subs;
  subs.reserve(4);
  // Storage is row-major over (class, group); inputs are ordered (00, 10, 01, 11).
  for (std::size_t cls = 0; cls < 2; ++cls) {
    for (std::size_t grp = 0; grp < 2; ++grp) {
      const std::size_t k = cls + 2 * grp;
      table(static_cast<Eigen::Index>(cls), static_cast<Eigen::Index>(grp)) = q[k];
      subs.emplace_back(means[k], stds[k]);
    }
  }
  return FairDistribution(JointWeights(table), std::move(subs));
}

const SubgroupGaussian& FairDistribution::subgroup(std::size_t cls, std::size_t group) const {
  if (cls >= num_classes() || group >= num_groups()) {
    throw Error(ErrorCode::MissingCell, "no subgroup for cell (" + std::to_string(cls) + "," + std::to_string(group) + ")");
  }
  return subgroups_[index(cls, group)];
}

FairDistribution FairDistribution::with_subgroup(std::size_t cls, std::size_t group, SubgroupGaussian g) const {
  FairDistribution copy = *this;
  if (g.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "replacement subgroup has a different dimension");
  copy.subgroups_.at(index(cls, group)) = std::move(g);
  return copy;
}

FairDistribution FairDistribution::with_weights(JointWeights weights) const {
  if (weights.num_classes() != num_classes() || weights.num_groups() != num_groups()) {
    throw Error(ErrorCode::KeyMismatch, "replacement weights have a different shape");
  }
  FairDistribution copy = *this;
  copy.weights_ = std::move(weights);
  return copy;
}

void require_binary_univariate(const FairDistribution& dist, const char* operation) {
  if (!dist.is_binary_univariate()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(operation) + " requires a binary-class, binary-group univariate distribution");
  }
}

}  // namespace fairsteer
