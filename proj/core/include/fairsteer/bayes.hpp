#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairsteer/distribution.hpp"

namespace fairsteer {

/// c(i, j) = cost of predicting j when the truth is i.
struct CostMatrix {
  Eigen::MatrixXd c;

  [[nodiscard]] static CostMatrix binary(double c00, double c01, double c10, double c11);
  [[nodiscard]] static CostMatrix zero_one(std::size_t classes = 2);
};

/// t_C = (c10 - c00) / (c10 - c00 + c01 - c11).
[[nodiscard]] double cost_threshold(const CostMatrix& cost);

struct Interval {
  double lo;
  double hi;
};

/// Per group, sorted disjoint intervals on which class 1 is predicted.
struct DecisionRegions {
  std::vector<std::vector<Interval>> per_group;

  [[nodiscard]] bool predicts_one(std::size_t group, double x) const;
};

/// Exact solution of {x : eta(x, a) >= t} for each group.
[[nodiscard]] DecisionRegions decision_regions(const FairDistribution& dist, double t);

/// eta(x, a) = P(Y = 1 | X = x, A = a).
[[nodiscard]] double posterior(const FairDistribution& dist, double x, std::size_t group);

/// Mass of the predict-1 region under the group mixture (cls empty) or class cls.
[[nodiscard]] double positive_rate(const FairDistribution& dist, const DecisionRegions& regions, std::size_t group,
                                   std::optional<std::size_t> cls = std::nullopt);

struct FairnessReport {
  double threshold = 0.5;
  double bayes_error = 0.0;
  double delta_dp = 0.0;
  double delta_eo = 0.0;
  std::map<std::string, double> per_class_tpr_gap;
};

/// Error, DP gap and EO gap of the t-threshold Bayes classifier of dist.
[[nodiscard]] FairnessReport fairness_report(const FairDistribution& dist, double t);

/// Same quantities for a fixed classifier evaluated on dist.
[[nodiscard]] FairnessReport evaluate_regions(const FairDistribution& dist, const DecisionRegions& regions, double t);

[[nodiscard]] std::string fairness_csv_header(const FairnessReport& r);
[[nodiscard]] std::string fairness_csv_row(const FairnessReport& r);

struct TprGaps {
  std::map<std::size_t, double> gap;   // class -> max over group pairs of |TPR_a - TPR_a'|
  std::vector<std::size_t> omitted;    // classes with an empty (class, group) cell
};

[[nodiscard]] TprGaps tpr_gap_multiclass(const std::vector<std::size_t>& labels, const std::vector<std::size_t>& groups,
                                         const std::vector<std::size_t>& preds);

/// argmax_i q_ia p_ia(x); the group-aware multi-class Bayes rule under 0-1 loss.
[[nodiscard]] std::size_t predict_class(const FairDistribution& dist, const Eigen::VectorXd& x, std::size_t group);

}  // namespace fairsteer
