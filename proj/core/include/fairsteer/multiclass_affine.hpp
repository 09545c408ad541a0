#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace fairsteer {

/// Per-(class, group) diagonal moments. Group 0 is the group steered toward
/// group 1's geometry; both groups of non-anchor classes move.
struct CellMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  std::size_t count = 0;
};

struct ClassGroupMoments {
  std::size_t num_classes = 0;
  std::size_t num_groups = 0;
  std::size_t dim = 0;
  std::vector<CellMoments> cells;  // row-major over (class, group)
  Eigen::MatrixXd q;               // classes x groups, sums to 1

  [[nodiscard]] const CellMoments& at(std::size_t cls, std::size_t group) const;
  [[nodiscard]] CellMoments& at(std::size_t cls, std::size_t group);
};

/// Sample moments of the rows of each (label, group) cell; q from counts.
[[nodiscard]] ClassGroupMoments fit_moments(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                                            const std::vector<std::size_t>& groups, std::size_t num_classes,
                                            std::size_t num_groups);

/// Class with the smallest TPR gap, smallest index on ties.
[[nodiscard]] std::size_t pick_anchor_class(const std::vector<std::size_t>& labels,
                                            const std::vector<std::size_t>& groups,
                                            const std::vector<std::size_t>& preds);

enum class WeightMode {
  Equal,    // q_y0 = q_y1
  Kamiran,  // reweighed count-derived weights
};

/// Target moments for two groups given an anchor class.
[[nodiscard]] ClassGroupMoments ef_affirmative_targets(const ClassGroupMoments& moments, std::size_t anchor,
                                                       WeightMode mode = WeightMode::Equal);

struct AffineCell {
  Eigen::VectorXd scale;
  Eigen::VectorXd offset;
};

struct AffineMap {
  std::size_t num_classes = 0;
  std::size_t num_groups = 0;
  std::vector<AffineCell> cells;  // row-major over (class, group)

  [[nodiscard]] const AffineCell& at(std::size_t cls, std::size_t group) const;
};

/// a = sign * target.std / orig.std, b = target.mean - a * orig.mean.
[[nodiscard]] AffineMap affine_from_moments(const ClassGroupMoments& orig, const ClassGroupMoments& target,
                                            const std::vector<int>& signs = {});

struct LabeledFeatures {
  const Eigen::MatrixXd& features;
  const std::vector<std::size_t>& labels;
  const std::vector<std::size_t>& groups;
};

/// With validation data, picks each cell's sign greedily (cells in key order)
/// by the validation error of a group-aware plug-in scorer built on target.
[[nodiscard]] AffineMap fit_affine(const ClassGroupMoments& orig, const ClassGroupMoments& target,
                                   const LabeledFeatures* validation = nullptr);

[[nodiscard]] Eigen::MatrixXd apply_affine(const AffineMap& map, const Eigen::MatrixXd& features,
                                           const std::vector<std::size_t>& labels,
                                           const std::vector<std::size_t>& groups);

/// Group-unaware diagonal-Gaussian plug-in classifier with class priors.
struct PlugInClassifier {
  Eigen::MatrixXd mean;      // classes x d
  Eigen::MatrixXd log_std;   // classes x d
  Eigen::MatrixXd inv_std;   // classes x d
  Eigen::VectorXd log_prior;

  [[nodiscard]] static PlugInClassifier fit(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                                            std::size_t num_classes);
  [[nodiscard]] std::vector<std::size_t> predict(const Eigen::MatrixXd& features) const;
};

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct PipelineOptions {
  SplitFractions split;
  std::uint64_t seed = 0;
  WeightMode weights = WeightMode::Equal;
};

struct PipelineResult {
  std::size_t anchor = 0;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  std::map<std::size_t, double> gap_before;
  std::map<std::size_t, double> gap_after;
  double rms_gap_before = 0.0;
  double rms_gap_after = 0.0;
  AffineMap map;
  Eigen::MatrixXd steered;  // every input row, steered with its own label and group
};

/// Baseline fit, anchor choice on validation, steering from train moments,
/// refit and test-set evaluation.
[[nodiscard]] PipelineResult evaluate_pipeline(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                                               const std::vector<std::size_t>& groups,
                                               const PipelineOptions& options = {});

/// Deterministic permutation of 0..n-1.
[[nodiscard]] std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

[[nodiscard]] double rms(const std::map<std::size_t, double>& gaps);

}  // namespace fairsteer
