#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairsteer/distribution.hpp"

namespace fairsteer {

inline constexpr double kIdealTol = 1e-8;

struct IdealityResiduals {
  double standardized_gap_gap = 0.0;  // class-mean gaps in the whitened frame
  double variance_ratio_gap = 0.0;    // scale ratios between classes
  double weight_ratio_gap = 0.0;      // q_ia / q_ja across groups
};

struct ConditionLine {
  std::string name;
  std::optional<double> lhs;
  std::optional<double> rhs;
  double residual = 0.0;
};

struct IdealityVerdict {
  bool is_ideal = false;
  IdealityResiduals residuals;
  double tolerance = kIdealTol;
  std::vector<ConditionLine> conditions;

  [[nodiscard]] double max_residual() const;
  [[nodiscard]] std::string report() const;
};

/// Binary univariate conditions:
///   (m01 - m11)/s11 = (m00 - m10)/s10,  s11/s01 = s10/s00,  q10/q00 = q11/q01.
[[nodiscard]] IdealityVerdict check_ideal_univariate(const FairDistribution& dist, double tol = kIdealTol);

/// Whether every group is an orientation-preserving affine image of group 0
/// with matching class-weight ratios. Works in any dimension, any number of classes.
[[nodiscard]] IdealityVerdict check_ideal_multivariate(const FairDistribution& dist, double tol = kIdealTol);

/// Univariate check for binary d = 1 input, multivariate check otherwise.
[[nodiscard]] IdealityVerdict check_ideal(const FairDistribution& dist, double tol = kIdealTol);

/// max over class pairs and groups of |q_ia/q_ja - q_i0/q_j0|.
[[nodiscard]] double weight_ratio_residual(const JointWeights& w);

/// q_ia proportional to P(Y = i) P(A = a).
[[nodiscard]] JointWeights reweigh_kamiran(const JointWeights& w);

struct PinskerBounds {
  double err_transfer = 0.0;  // sqrt(2 KL)
  double eo_bound = 0.0;      // sqrt(8 KL)

  [[nodiscard]] double err_transfer_prob() const { return err_transfer < 1.0 ? err_transfer : 1.0; }
  [[nodiscard]] double eo_bound_prob() const { return eo_bound < 1.0 ? eo_bound : 1.0; }
};

[[nodiscard]] PinskerBounds pinsker_bounds(double kl);

}  // namespace fairsteer
