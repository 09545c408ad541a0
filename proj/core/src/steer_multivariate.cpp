#include "fairsteer/steer_multivariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fairsteer/error.hpp"
#include "fairsteer/linalg.hpp"

namespace fairsteer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_binary_multivariate(const FairDistribution& dist) {
  if (!dist.is_binary()) throw Error(ErrorCode::InvalidArgument, "multivariate affirmative action needs two classes and two groups");
  if (dist.dim() > kMaxMultivariateDim) {
    throw Error(ErrorCode::InvalidArgument, "dimension " + std::to_string(dist.dim()) + " exceeds the cap of " +
                                                std::to_string(kMaxMultivariateDim));
  }
  require_weight_ratio(dist, "affirmative_multivariate");
}

// Quantities of the inner program that do not depend on Gamma.
struct Program {
  Eigen::Index d;
  double q00, q10;
  Eigen::VectorXd mu00, mu10, delta;
  Eigen::MatrixXd s01, s11;
  Eigen::MatrixXd p00, p10;  // inverses of the group-0 covariances
  Eigen::MatrixXd a_inv;     // (q00 P00 + q10 P10)^{-1}
  Eigen::VectorXd base;      // q00 P00 mu00 + q10 P10 mu10
  double logdet00, logdet10, logdet01, logdet11;

  explicit Program(const FairDistribution& dist) {
    const auto& g00 = dist.subgroup(0, 0);
    const auto& g10 = dist.subgroup(1, 0);
    const auto& g01 = dist.subgroup(0, 1);
    const auto& g11 = dist.subgroup(1, 1);
    d = static_cast<Eigen::Index>(dist.dim());
    q00 = dist.q(0, 0);
    q10 = dist.q(1, 0);
    mu00 = g00.mean_vec();
    mu10 = g10.mean_vec();
    delta = g11.mean_vec() - g01.mean_vec();
    s01 = g01.cov();
    s11 = g11.cov();
    p00 = linalg::spd_inverse(g00.cov(), kEpsPd);
    p10 = linalg::spd_inverse(g10.cov(), kEpsPd);
    a_inv = linalg::spd_inverse(q00 * p00 + q10 * p10);
    base = q00 * p00 * mu00 + q10 * p10 * mu10;
    logdet00 = linalg::spd_log_det(g00.cov(), kEpsPd);
    logdet10 = linalg::spd_log_det(g10.cov(), kEpsPd);
    logdet01 = linalg::spd_log_det(s01, kEpsPd);
    logdet11 = linalg::spd_log_det(s11, kEpsPd);
  }

  [[nodiscard]] Eigen::VectorXd mean00(const Eigen::MatrixXd& g) const {
    return a_inv * (base - q10 * p10 * (g * delta));
  }

  [[nodiscard]] double objective(const Eigen::MatrixXd& g) const {
    const Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) return kInf;
    const double logdet_g = 2.0 * llt.matrixLLT().diagonal().array().log().sum();  // log det Gamma
    if (!std::isfinite(logdet_g)) return kInf;
    const Eigen::VectorXd m00 = mean00(g);
    const Eigen::VectorXd m10 = m00 + g * delta;
    const Eigen::MatrixXd c00 = g * s01 * g;
    const Eigen::MatrixXd c10 = g * s11 * g;
    const Eigen::VectorXd e0 = m00 - mu00;
    const Eigen::VectorXd e1 = m10 - mu10;
    const auto dd = static_cast<double>(d);
    const double kl0 = 0.5 * ((p00 * c00).trace() + e0.dot(p00 * e0) - dd - (2.0 * logdet_g + logdet01) + logdet00);
    const double kl1 = 0.5 * ((p10 * c10).trace() + e1.dot(p10 * e1) - dd - (2.0 * logdet_g + logdet11) + logdet10);
    return q00 * kl0 + q10 * kl1;
  }

  // Frobenius gradient over symmetric matrices by central differences.
  [[nodiscard]] Eigen::MatrixXd gradient(const Eigen::MatrixXd& g) const {
    const double h = 1e-6 * (1.0 + g.norm());
    Eigen::MatrixXd grad(d, d);
    Eigen::MatrixXd probe = g;
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) {
        const auto at = [&](double s) {
          probe(i, j) = g(i, j) + s;
          probe(j, i) = g(j, i) + s;
          return objective(probe);
        };
        // Near the PSD boundary the step shrinks until both probes stay positive definite.
        double hh = h, fp = at(hh), fm = at(-hh);
        for (int k = 0; k < 60 && !(std::isfinite(fp) && std::isfinite(fm)); ++k) {
          hh *= 0.5;
          fp = at(hh);
          fm = at(-hh);
        }
        probe(i, j) = g(i, j);
        probe(j, i) = g(j, i);
        const double deriv = (fp - fm) / (2.0 * hh);
        grad(i, j) = i == j ? deriv : 0.5 * deriv;
        grad(j, i) = grad(i, j);
      }
    }
    return grad;
  }
};

Eigen::MatrixXd project(const Eigen::MatrixXd& g) { return linalg::clip_eigenvalues(g, kGammaFloor); }

}  // namespace

double inner_objective(const FairDistribution& dist, const Eigen::MatrixXd& gamma) {
  require_binary_multivariate(dist);
  if (gamma.rows() != static_cast<Eigen::Index>(dist.dim()) || gamma.cols() != gamma.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Gamma must be d x d");
  }
  return Program(dist).objective(linalg::symmetrize(gamma));
}

InnerSolution inner_solution(const FairDistribution& dist, const Eigen::MatrixXd& gamma) {
  require_binary_multivariate(dist);
  if (gamma.rows() != static_cast<Eigen::Index>(dist.dim()) || gamma.cols() != gamma.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Gamma must be d x d");
  }
  const Eigen::MatrixXd g = linalg::symmetrize(gamma);
  const Program prog(dist);
  InnerSolution s;
  s.mean00 = prog.mean00(g);
  s.mean10 = s.mean00 + g * prog.delta;
  s.cov00 = linalg::symmetrize(g * prog.s01 * g.transpose());
  s.cov10 = linalg::symmetrize(g * prog.s11 * g.transpose());
  s.objective = prog.objective(g);
  if (!std::isfinite(s.objective)) throw Error(ErrorCode::SingularCovariance, "Gamma is not positive definite");
  return s;
}

Eigen::MatrixXd initial_gamma(const FairDistribution& dist) {
  return linalg::spd_congruence_root(dist.subgroup(0, 1).cov(), dist.subgroup(0, 0).cov());
}

InterventionResult affirmative_multivariate(const FairDistribution& dist, const PgdOptions& opt, double threshold) {
  require_binary_multivariate(dist);
  const Program prog(dist);

  Eigen::MatrixXd g = project(initial_gamma(dist));
  double f = prog.objective(g);
  Eigen::MatrixXd grad = prog.gradient(g);
  double step = opt.step_init;
  bool converged = grad.norm() <= opt.grad_tol;
  std::size_t it = 0;
  constexpr double kArmijo = 1e-4;
  constexpr double kBacktrack = 0.5;

  while (!converged && it < opt.max_iters) {
    ++it;
    Eigen::MatrixXd next;
    double f_next = kInf;
    bool accepted = false;
    for (double t = step; t > 1e-20; t *= kBacktrack) {
      next = project(g - t * grad);
      f_next = prog.objective(next);
      const double decrease = (grad.array() * (next - g).array()).sum();
      if (f_next <= f + kArmijo * decrease) {
        accepted = true;
        break;
      }
    }
    if (!accepted || f_next >= f) {
      // No further decrease at floating-point resolution.
      break;
    }
    const Eigen::MatrixXd next_grad = prog.gradient(next);
    const Eigen::MatrixXd s = next - g;
    const Eigen::MatrixXd y = next_grad - grad;
    const double sy = (s.array() * y.array()).sum();
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : opt.step_init;
    g = next;
    f = f_next;
    grad = next_grad;
    // Projected-gradient stationarity so that active floors do not block convergence.
    converged = (project(g - grad) - g).norm() <= opt.grad_tol;
  }
  if (!converged) converged = (project(g - grad) - g).norm() <= opt.grad_tol;

  const InnerSolution sol = inner_solution(dist, g);
  FairDistribution steered = dist.with_subgroup(0, 0, SubgroupGaussian(sol.mean00, sol.cov00))
                                 .with_subgroup(1, 0, SubgroupGaussian(sol.mean10, sol.cov10));
  std::optional<double> scalar;
  if (dist.dim() == 1) scalar = g(0, 0);
  auto r = make_intervention_result(Method::Multivariate, dist, std::move(steered), scalar, threshold);
  r.gamma_matrix = g;
  r.converged = converged;
  r.iterations = it;
  return r;
}

}  // namespace fairsteer
