#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairsteer/distribution.hpp"

namespace fairsteer {

/// Labeled feature rows: features is n x d, classes/groups hold one label per row.
struct SampleSet {
  Eigen::MatrixXd features;
  std::vector<std::string> classes;
  std::vector<std::string> groups;

  [[nodiscard]] std::size_t size() const noexcept { return classes.size(); }
};

struct FitOptions {
  bool log_transform = false;
};

/// Label order used for classes and groups: numeric labels numerically, others lexicographically.
[[nodiscard]] std::vector<std::string> ordered_labels(const std::vector<std::string>& labels);

/// Empirical cell frequencies plus sample mean and unbiased covariance per cell.
[[nodiscard]] FairDistribution fit_from_samples(const SampleSet& rows, const FitOptions& options = {});

}  // namespace fairsteer
