#include "fairsteer/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fairsteer/error.hpp"
#include "fairsteer/gaussian.hpp"

namespace fairsteer {

namespace {

constexpr double kQuadTol = 1e-8;

void require_same_keys(const FairDistribution& a, const FairDistribution& b) {
  if (a.num_classes() != b.num_classes() || a.num_groups() != b.num_groups() || a.class_names() != b.class_names() ||
      a.group_names() != b.group_names()) {
    throw Error(ErrorCode::KeyMismatch, "distributions have different (class, group) key sets");
  }
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "distributions have different feature dimensions");
}

// log((1 + e^d) / 2), accurate near d = 0.
double log_half_one_plus_exp(double d) {
  if (std::abs(d) < 1.0) return std::log1p(0.5 * std::expm1(d));
  return d > 0.0 ? d + std::log1p(std::exp(-d)) - std::numbers::ln2 : std::log1p(std::exp(d)) - std::numbers::ln2;
}

// Integrand of the mixture JS at x given the two log densities.
double js_integrand(double la, double lb) {
  double v = 0.0;
  if (la > -700.0) v -= 0.5 * std::exp(la) * log_half_one_plus_exp(lb - la);
  if (lb > -700.0) v -= 0.5 * std::exp(lb) * log_half_one_plus_exp(la - lb);
  return v;
}

template <class F>
double integrate_js(F f, double lo, double hi) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 15, 1e-12, &err);
  if (!std::isfinite(v) || err > kQuadTol) {
    throw Error(ErrorCode::QuadratureFailure, "JS quadrature error estimate " + std::to_string(err));
  }
  return v;
}

}  // namespace

double kl_gaussian(const SubgroupGaussian& p_new, const SubgroupGaussian& p_orig) {
  if (p_new.dim() != p_orig.dim()) throw Error(ErrorCode::DimensionMismatch, "KL between different dimensions");
  if (p_new.is_univariate()) {
    const double s = p_orig.variance();
    const double st = p_new.variance();
    const double dm = p_new.mean() - p_orig.mean();
    return dm * dm / (2.0 * s) + (st - s) / (2.0 * s) + 0.5 * std::log(s / st);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(p_orig.cov());
  const Eigen::LLT<Eigen::MatrixXd> llt_new(p_new.cov());
  if (llt.info() != Eigen::Success || llt_new.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularCovariance, "covariance factorization failed");
  }
  const auto d = static_cast<double>(p_new.dim());
  const Eigen::VectorXd dm = p_new.mean_vec() - p_orig.mean_vec();
  const double trace = llt.solve(p_new.cov()).trace();
  const double maha = dm.dot(llt.solve(dm));
  const auto log_det = [](const Eigen::LLT<Eigen::MatrixXd>& f) {
    return 2.0 * f.matrixLLT().diagonal().array().log().sum();
  };
  return 0.5 * (trace + maha - d + log_det(llt) - log_det(llt_new));
}

double kl_divergence(const FairDistribution& dist_new, const FairDistribution& dist_orig) {
  require_same_keys(dist_new, dist_orig);
  const double diff = dist_new.weights().max_abs_diff(dist_orig.weights());
  if (diff > kWeightSumTol) {
    throw Error(ErrorCode::WeightsMismatch, "KL decomposition requires identical weights (max diff " +
                                                std::to_string(diff) + ")");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < dist_new.num_classes(); ++i) {
    for (std::size_t a = 0; a < dist_new.num_groups(); ++a) {
      total += dist_orig.q(i, a) * kl_gaussian(dist_new.subgroup(i, a), dist_orig.subgroup(i, a));
    }
  }
  // Rounding can leave identical pairs a few ulps below zero.
  return std::max(total, 0.0);
}

double js_gaussian(const SubgroupGaussian& a, const SubgroupGaussian& b) {
  if (!a.is_univariate() || !b.is_univariate()) {
    throw Error(ErrorCode::InvalidArgument, "JS quadrature is univariate only");
  }
  if (a == b) return 0.0;
  // JS <= (KL(a||b) + KL(b||a)) / 4. Below 1e-14 the integrand is rounding noise; JS ~ J / 8 there.
  const double jeffreys = kl_gaussian(a, b) + kl_gaussian(b, a);
  if (jeffreys <= 4e-14) return jeffreys / 8.0;
  const double max_sd = std::max(a.stddev(), b.stddev());
  const double lo = std::min(a.mean(), b.mean()) - 10.0 * max_sd;
  const double hi = std::max(a.mean(), b.mean()) + 10.0 * max_sd;
  const double js =
      integrate_js([&](double x) { return js_integrand(gaussian_logpdf(x, a), gaussian_logpdf(x, b)); }, lo, hi);
  return std::clamp(js, 0.0, std::numbers::ln2);
}

double js_divergence(const FairDistribution& dist_a, const FairDistribution& dist_b) {
  require_same_keys(dist_a, dist_b);
  // p(x,i,a) = q_ia p_ia(x); cells with equal weights reduce to q_ia JS(P_ia, P'_ia).
  double total = 0.0;
  for (std::size_t i = 0; i < dist_a.num_classes(); ++i) {
    for (std::size_t g = 0; g < dist_a.num_groups(); ++g) {
      const double qa = dist_a.q(i, g);
      const double qb = dist_b.q(i, g);
      const auto& pa = dist_a.subgroup(i, g);
      const auto& pb = dist_b.subgroup(i, g);
      if (std::abs(qa - qb) <= kWeightSumTol) {
        total += 0.5 * (qa + qb) * js_gaussian(pa, pb);
        continue;
      }
      const double lqa = std::log(qa);
      const double lqb = std::log(qb);
      const double jeffreys = (qa - qb) * (lqa - lqb) + qa * kl_gaussian(pa, pb) + qb * kl_gaussian(pb, pa);
      if (jeffreys <= 4e-14) {
        total += jeffreys / 8.0;
        continue;
      }
      const double max_sd = std::max(pa.stddev(), pb.stddev());
      const double lo = std::min(pa.mean(), pb.mean()) - 10.0 * max_sd;
      const double hi = std::max(pa.mean(), pb.mean()) + 10.0 * max_sd;
      total += integrate_js(
          [&](double x) { return js_integrand(lqa + gaussian_logpdf(x, pa), lqb + gaussian_logpdf(x, pb)); }, lo, hi);
    }
  }
  return std::clamp(total, 0.0, std::numbers::ln2);
}

DivergenceReport divergence_report(const FairDistribution& dist_new, const FairDistribution& dist_orig) {
  DivergenceReport r;
  r.kl = kl_divergence(dist_new, dist_orig);
  if (dist_new.dim() == 1) r.js = js_divergence(dist_new, dist_orig);
  return r;
}

}  // namespace fairsteer
