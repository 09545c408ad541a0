#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "fairsteer/bayes.hpp"
#include "fairsteer/distribution.hpp"
#include "fairsteer/divergence.hpp"
#include "fairsteer/ideality.hpp"

namespace fairsteer {

enum class Method { Affirmative, AllSubgroups, MeanMatching, Multivariate };

[[nodiscard]] std::string_view method_name(Method m) noexcept;  // affirmative | all | mean-match | multivariate
[[nodiscard]] std::optional<Method> parse_method(std::string_view name) noexcept;

// Weight-ratio tolerance required by the affirmative and all-subgroups programs.
inline constexpr double kWeightRatioTol = 1e-9;

struct InterventionResult {
  Method method;
  FairDistribution original;
  FairDistribution steered;
  std::optional<double> gamma_star;
  std::optional<Eigen::MatrixXd> gamma_matrix;
  DivergenceReport divergences;
  std::optional<FairnessReport> report_before;  // univariate only
  std::optional<FairnessReport> report_after;
  PinskerBounds pinsker;
  bool converged = true;
  std::size_t iterations = 0;
};

/// Fills divergences, reports and bounds for a steered distribution.
[[nodiscard]] InterventionResult make_intervention_result(Method method, const FairDistribution& original,
                                                          FairDistribution steered, std::optional<double> gamma,
                                                          double threshold);

[[nodiscard]] std::string diagnostics_csv_header();
[[nodiscard]] std::string diagnostics_csv_row(const InterventionResult& r);

// Affirmative action: group 0 moves, group 1 stays.
[[nodiscard]] double affirmative_gamma(const FairDistribution& dist);
/// Best group-0 parameters for a fixed std ratio gamma = s_i0 / s_i1.
[[nodiscard]] FairDistribution affirmative_at_gamma(const FairDistribution& dist, double gamma);
[[nodiscard]] InterventionResult affirmative_univariate(const FairDistribution& dist, double threshold = 0.5);

// All subgroups move; gamma = s_i1 / s_i0 is found by line search.
struct LineSearch {
  double gamma_min = 1e-3;
  double gamma_max = 1e3;
  std::size_t grid_points = 2000;
  std::size_t refine_iters = 60;
};

[[nodiscard]] FairDistribution all_subgroups_at_gamma(const FairDistribution& dist, double gamma);
/// Closed-form KL(all_subgroups_at_gamma(dist, gamma) || dist).
[[nodiscard]] double all_subgroups_objective(const FairDistribution& dist, double gamma);
[[nodiscard]] double all_subgroups_gamma(const FairDistribution& dist, const LineSearch& search = {});
[[nodiscard]] InterventionResult all_subgroups_univariate(const FairDistribution& dist, const LineSearch& search = {},
                                                          double threshold = 0.5);

// Equalize the two group mixture means by moving group-0 class means.
[[nodiscard]] InterventionResult mean_matching(const FairDistribution& dist, double threshold = 0.5);

/// Throws WeightRatioViolation unless q10/q00 = q11/q01 within kWeightRatioTol.
void require_weight_ratio(const FairDistribution& dist, const char* operation);

}  // namespace fairsteer
