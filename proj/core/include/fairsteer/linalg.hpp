#pragma once

#include <Eigen/Dense>

namespace fairsteer::linalg {

[[nodiscard]] Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

// Functions of symmetric positive definite matrices via eigendecomposition.
// SingularCovariance is thrown when an eigenvalue is <= floor.
[[nodiscard]] Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, double floor = 0.0);
[[nodiscard]] Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m, double floor = 0.0);
[[nodiscard]] Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, double floor = 0.0);
[[nodiscard]] double spd_log_det(const Eigen::MatrixXd& m, double floor = 0.0);

/// Symmetric part with eigenvalues clipped from below at floor.
[[nodiscard]] Eigen::MatrixXd clip_eigenvalues(const Eigen::MatrixXd& m, double floor);

/// Solution of G a G = b for SPD a, b (the SPD geometric-mean form).
[[nodiscard]] Eigen::MatrixXd spd_congruence_root(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct GeneralizedEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns v with v' b v = 1
};

/// a v = lambda b v for symmetric a and SPD b.
[[nodiscard]] GeneralizedEigen generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace fairsteer::linalg
