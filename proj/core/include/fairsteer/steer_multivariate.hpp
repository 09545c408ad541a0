#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "fairsteer/distribution.hpp"
#include "fairsteer/steer_univariate.hpp"

namespace fairsteer {

inline constexpr std::size_t kMaxMultivariateDim = 64;
// Eigenvalue floor used when projecting Gamma onto the PSD cone.
inline constexpr double kGammaFloor = 1e-8;

struct InnerSolution {
  Eigen::VectorXd mean00;
  Eigen::VectorXd mean10;
  Eigen::MatrixXd cov00;
  Eigen::MatrixXd cov10;
  double objective = 0.0;
};

/// Optimal group-0 moments for a fixed symmetric PD Gamma, and the resulting KL.
[[nodiscard]] InnerSolution inner_solution(const FairDistribution& dist, const Eigen::MatrixXd& gamma);

/// KL of the inner solution; +inf when Gamma is not positive definite.
[[nodiscard]] double inner_objective(const FairDistribution& dist, const Eigen::MatrixXd& gamma);

/// SPD solution of G S01 G = S00.
[[nodiscard]] Eigen::MatrixXd initial_gamma(const FairDistribution& dist);

struct PgdOptions {
  std::size_t max_iters = 5000;
  double step_init = 1.0;
  double grad_tol = 1e-8;
};

/// Binary-class multivariate affirmative action. converged is false when the
/// gradient tolerance was not met; the best iterate is returned regardless.
[[nodiscard]] InterventionResult affirmative_multivariate(const FairDistribution& dist, const PgdOptions& opt = {},
                                                          double threshold = 0.5);

}  // namespace fairsteer
