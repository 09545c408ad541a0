#include "fairsteer/linalg.hpp"

#include <cmath>
#include <string>

#include "fairsteer/error.hpp"

namespace fairsteer::linalg {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> checked_eig(const Eigen::MatrixXd& m, double floor) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= floor) {
    throw Error(ErrorCode::SingularCovariance,
                "matrix is not positive definite (min eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()) + ")");
  }
  return eig;
}

template <class F>
Eigen::MatrixXd spectral(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig, F f) {
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd mapped = eig.eigenvalues().unaryExpr(f);
  return symmetrize(v * mapped.asDiagonal() * v.transpose());
}

}  // namespace

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, double floor) {
  return spectral(checked_eig(m, floor), [](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& m, double floor) {
  return spectral(checked_eig(m, floor), [](double x) { return 1.0 / std::sqrt(x); });
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, double floor) {
  return spectral(checked_eig(m, floor), [](double x) { return 1.0 / x; });
}

double spd_log_det(const Eigen::MatrixXd& m, double floor) {
  return checked_eig(m, floor).eigenvalues().array().log().sum();
}

Eigen::MatrixXd clip_eigenvalues(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
  return spectral(eig, [floor](double x) { return std::max(x, floor); });
}

Eigen::MatrixXd spd_congruence_root(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd ah = spd_sqrt(a);
  const Eigen::MatrixXd aih = spd_inv_sqrt(a);
  return symmetrize(aih * spd_sqrt(ah * b * ah) * aih);
}

GeneralizedEigen generalized_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "pencil shapes differ");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(symmetrize(a), symmetrize(b));
  if (ges.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "generalized eigendecomposition failed");
  return {ges.eigenvalues(), ges.eigenvectors()};
}

}  // namespace fairsteer::linalg
