#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fairsteer {

// Eigenvalue floor for covariance matrices.
inline constexpr double kEpsPd = 1e-10;
// Floor applied to fitted standard deviations.
inline constexpr double kEpsStd = 1e-8;
// Joint weights must sum to one within this tolerance.
inline constexpr double kWeightSumTol = 1e-12;

/// (class, group) index pair. Classes index rows and groups index columns
/// of the joint weight table.
struct CellKey {
  std::size_t cls = 0;
  std::size_t group = 0;

  auto operator<=>(const CellKey&) const = default;
};

/// Distribution of the features within one (class, group) cell:
/// N(mean, cov). The univariate case is dim() == 1 with cov = std^2.
class SubgroupGaussian {
 public:
  SubgroupGaussian(double mean, double stddev);
  SubgroupGaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  [[nodiscard]] bool is_univariate() const noexcept { return dim() == 1; }

  // Univariate accessors; throw InvalidArgument when dim() != 1.
  [[nodiscard]] double mean() const;
  [[nodiscard]] double stddev() const;
  [[nodiscard]] double variance() const;

  [[nodiscard]] const Eigen::VectorXd& mean_vec() const noexcept { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& cov() const noexcept { return cov_; }

  friend bool operator==(const SubgroupGaussian& a, const SubgroupGaussian& b) {
    return a.mean_ == b.mean_ && a.cov_ == b.cov_;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// q_ia = P(Y = i, A = a), stored as a classes x groups table.
class JointWeights {
 public:
  explicit JointWeights(Eigen::MatrixXd q);

  /// Rescales a positive table so that it sums to one.
  [[nodiscard]] static JointWeights normalized(const Eigen::MatrixXd& unnormalized);
  [[nodiscard]] static JointWeights uniform(std::size_t classes, std::size_t groups);

  [[nodiscard]] double operator()(std::size_t cls, std::size_t group) const { return q_(cls, group); }
  [[nodiscard]] std::size_t num_classes() const noexcept { return static_cast<std::size_t>(q_.rows()); }
  [[nodiscard]] std::size_t num_groups() const noexcept { return static_cast<std::size_t>(q_.cols()); }
  [[nodiscard]] const Eigen::MatrixXd& table() const noexcept { return q_; }

  [[nodiscard]] double class_marginal(std::size_t cls) const { return q_.row(cls).sum(); }
  [[nodiscard]] double group_marginal(std::size_t group) const { return q_.col(group).sum(); }

  /// Largest absolute entrywise difference.
  [[nodiscard]] double max_abs_diff(const JointWeights& other) const;

 private:
  Eigen::MatrixXd q_;
};

/// Joint law of (X, Y, A) with Gaussian class/group-conditional features.
/// Group index 0 is the group that affirmative interventions change.
class FairDistribution {
 public:
  FairDistribution(JointWeights weights, std::vector<SubgroupGaussian> subgroups,
                   std::vector<std::string> class_names = {}, std::vector<std::string> group_names = {});

  /// Binary-class, binary-group univariate distribution from parameters
  /// listed as (00, 10, 01, 11), i.e. index = cls + 2 * group.
  [[nodiscard]] static FairDistribution binary_univariate(const std::array<double, 4>& means,
                                                         const std::array<double, 4>& stds,
                                                         const std::array<double, 4>& q);

  [[nodiscard]] const JointWeights& weights() const noexcept { return weights_; }
  [[nodiscard]] double q(std::size_t cls, std::size_t group) const { return weights_(cls, group); }
  [[nodiscard]] const SubgroupGaussian& subgroup(std::size_t cls, std::size_t group) const;
  [[nodiscard]] const SubgroupGaussian& subgroup(CellKey key) const { return subgroup(key.cls, key.group); }

  [[nodiscard]] std::size_t num_classes() const noexcept { return weights_.num_classes(); }
  [[nodiscard]] std::size_t num_groups() const noexcept { return weights_.num_groups(); }
  [[nodiscard]] std::size_t dim() const noexcept { return subgroups_.front().dim(); }
  [[nodiscard]] bool is_binary() const noexcept { return num_classes() == 2 && num_groups() == 2; }
  [[nodiscard]] bool is_binary_univariate() const noexcept { return is_binary() && dim() == 1; }

  [[nodiscard]] const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  [[nodiscard]] const std::vector<std::string>& group_names() const noexcept { return group_names_; }
  [[nodiscard]] const std::vector<SubgroupGaussian>& subgroups() const noexcept { return subgroups_; }

  [[nodiscard]] FairDistribution with_subgroup(std::size_t cls, std::size_t group, SubgroupGaussian g) const;
  [[nodiscard]] FairDistribution with_weights(JointWeights weights) const;

  friend bool operator==(const FairDistribution& a, const FairDistribution& b) {
    return a.weights_.table() == b.weights_.table() && a.subgroups_ == b.subgroups_ &&
           a.class_names_ == b.class_names_ && a.group_names_ == b.group_names_;
  }

 private:
  [[nodiscard]] std::size_t index(std::size_t cls, std::size_t group) const { return cls * num_groups() + group; }

  JointWeights weights_;
  std::vector<SubgroupGaussian> subgroups_;  // row-major over (class, group)
  std::vector<std::string> class_names_;
  std::vector<std::string> group_names_;
};

/// Throws InvalidArgument unless dist has two classes, two groups, d = 1.
void require_binary_univariate(const FairDistribution& dist, const char* operation);

}  // namespace fairsteer
