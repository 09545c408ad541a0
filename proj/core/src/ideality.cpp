#include "fairsteer/ideality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairsteer/error.hpp"
#include "fairsteer/linalg.hpp"

namespace fairsteer {

namespace {

constexpr double kClusterTol = 1e-6;

IdealityVerdict finish(IdealityResiduals r, double tol, std::vector<ConditionLine> lines) {
  IdealityVerdict v;
  v.residuals = r;
  v.tolerance = tol;
  v.conditions = std::move(lines);
  v.is_ideal = v.max_residual() <= tol;
  return v;
}

// Whitening basis of a group: columns v with v' S1 v = 1 and v' S0 v = lambda,
// oriented so det = +1.
struct GroupFrame {
  Eigen::VectorXd scale;  // lambda^{-1/2}
  Eigen::MatrixXd basis;
};

GroupFrame frame_of(const Eigen::MatrixXd& s0, const Eigen::MatrixXd& s1) {
  const auto ge = linalg::generalized_eigen(s0, s1);
  GroupFrame f;
  f.basis = ge.vectors;
  if (f.basis.determinant() < 0.0) f.basis.col(0) *= -1.0;
  f.scale = ge.values.array().rsqrt();
  return f;
}

struct Alignment {
  Eigen::MatrixXd d;  // orthogonal, block diagonal over eigenvalue clusters
  double residual = 0.0;
};

// Best orthogonal D (det +1) on eigenvalue clusters taking v onto u.
Alignment align(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
  const auto n = u.size();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;  // [begin, end)
  // Generalized eigenvalues come sorted ascending, so scale is descending.
  Eigen::Index begin = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k == n || std::abs(scale(k) - scale(k - 1)) > kClusterTol * std::max(1.0, std::abs(scale(k - 1)))) {
      clusters.emplace_back(begin, k);
      begin = k;
    }
  }

  Alignment out;
  out.d = Eigen::MatrixXd::Zero(n, n);
  int sign_product = 1;
  bool has_block = false;
  std::vector<double> cost;  // per cluster: residual with the preferred sign
  std::vector<double> flip_cost;
  for (const auto& [b, e] : clusters) {
    const Eigen::Index m = e - b;
    if (m == 1) {
      const double keep = std::abs(u(b) - v(b));
      const double flip = std::abs(u(b) + v(b));
      const int s = flip < keep ? -1 : 1;
      out.d(b, b) = s;
      sign_product *= s;
      cost.push_back(std::min(keep, flip));
      flip_cost.push_back(std::max(keep, flip));
      continue;
    }
    has_block = true;
    const Eigen::VectorXd ub = u.segment(b, m);
    const Eigen::VectorXd vb = v.segment(b, m);
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m, m);
    if (ub.norm() > 0.0 && vb.norm() > 0.0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(ub * vb.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::MatrixXd uu = svd.matrixU();
      if ((uu * svd.matrixV().transpose()).determinant() < 0.0) uu.col(m - 1) *= -1.0;
      r = uu * svd.matrixV().transpose();
    }
    out.d.block(b, b, m, m) = r;
    const double res = std::abs(ub.norm() - vb.norm());
    cost.push_back(res);
    flip_cost.push_back(res);
  }
  if (sign_product < 0 && !has_block) {
    // Flip the 1-D cluster whose sign change costs least.
    std::size_t best = 0;
    double best_delta = INFINITY;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double delta = flip_cost[c] - cost[c];
      if (delta < best_delta) {
        best_delta = delta;
        best = c;
      }
    }
    const auto k = clusters[best].first;
    out.d(k, k) *= -1.0;
    cost[best] = flip_cost[best];
  }
  out.residual = cost.empty() ? 0.0 : *std::max_element(cost.begin(), cost.end());
  return out;
}

}  // namespace

double IdealityVerdict::max_residual() const {
  return std::max({residuals.standardized_gap_gap, residuals.variance_ratio_gap, residuals.weight_ratio_gap});
}

std::string IdealityVerdict::report() const {
  std::ostringstream out;
  out.precision(10);
  out << (is_ideal ? "ideal" : "not ideal") << " (tolerance " << tolerance << ")\n";
  for (const auto& c : conditions) {
    out << "  " << c.name << ": ";
    if (c.lhs && c.rhs) out << *c.lhs << " vs " << *c.rhs << ", ";
    out << "residual " << c.residual << (c.residual <= tolerance ? "" : "  <-- violated") << "\n";
  }
  return out.str();
}

double weight_ratio_residual(const JointWeights& w) {
  double r = 0.0;
  for (std::size_t i = 0; i < w.num_classes(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double ref = w(i, 0) / w(j, 0);
      for (std::size_t a = 1; a < w.num_groups(); ++a) r = std::max(r, std::abs(w(i, a) / w(j, a) - ref));
    }
  }
  return r;
}

IdealityVerdict check_ideal_univariate(const FairDistribution& dist, double tol) {
  require_binary_univariate(dist, "check_ideal_univariate");
  const auto m = [&](std::size_t i, std::size_t a) { return dist.subgroup(i, a).mean(); };
  const auto s = [&](std::size_t i, std::size_t a) { return dist.subgroup(i, a).stddev(); };
  const auto q = [&](std::size_t i, std::size_t a) { return dist.q(i, a); };

  const double g1 = (m(0, 1) - m(1, 1)) / s(1, 1);
  const double g0 = (m(0, 0) - m(1, 0)) / s(1, 0);
  const double v1 = s(1, 1) / s(0, 1);
  const double v0 = s(1, 0) / s(0, 0);
  const double w0 = q(1, 0) / q(0, 0);
  const double w1 = q(1, 1) / q(0, 1);

  IdealityResiduals r{std::abs(g1 - g0), std::abs(v1 - v0), std::abs(w0 - w1)};
  return finish(r, tol,
                {{"standardized gap (m01-m11)/s11 = (m00-m10)/s10", g1, g0, r.standardized_gap_gap},
                 {"std ratio s11/s01 = s10/s00", v1, v0, r.variance_ratio_gap},
                 {"weight ratio q10/q00 = q11/q01", w0, w1, r.weight_ratio_gap}});
}

IdealityVerdict check_ideal_multivariate(const FairDistribution& dist, double tol) {
  if (dist.num_classes() < 2) throw Error(ErrorCode::InvalidArgument, "ideality needs at least two classes");
  for (const auto& g : dist.subgroups()) {
    // Throws SingularCovariance for non-PD input.
    (void)linalg::spd_log_det(g.cov(), kEpsPd);
  }
  IdealityResiduals r;
  r.weight_ratio_gap = weight_ratio_residual(dist.weights());

  const auto cov = [&](std::size_t i, std::size_t a) -> const Eigen::MatrixXd& { return dist.subgroup(i, a).cov(); };
  const auto mu = [&](std::size_t i, std::size_t a) -> const Eigen::VectorXd& { return dist.subgroup(i, a).mean_vec(); };

  const GroupFrame f0 = frame_of(cov(0, 0), cov(1, 0));
  for (std::size_t a = 1; a < dist.num_groups(); ++a) {
    const GroupFrame fa = frame_of(cov(0, a), cov(1, a));
    r.variance_ratio_gap = std::max(r.variance_ratio_gap, (f0.scale - fa.scale).cwiseAbs().maxCoeff());

    const Eigen::VectorXd u = f0.basis.transpose() * (mu(0, 0) - mu(1, 0));
    const Eigen::VectorXd v = fa.basis.transpose() * (mu(0, a) - mu(1, a));
    const Eigen::VectorXd mid_scale = 0.5 * (f0.scale + fa.scale);
    const Alignment al = align(u, v, mid_scale);
    r.standardized_gap_gap = std::max(r.standardized_gap_gap, al.residual);

    // Remaining classes must follow the same map.
    for (std::size_t i = 2; i < dist.num_classes(); ++i) {
      const Eigen::MatrixXd c0 = f0.basis.transpose() * cov(i, 0) * f0.basis;
      const Eigen::MatrixXd ca = al.d * fa.basis.transpose() * cov(i, a) * fa.basis * al.d.transpose();
      r.variance_ratio_gap = std::max(r.variance_ratio_gap, (c0 - ca).norm());
      const Eigen::VectorXd ui = f0.basis.transpose() * (mu(i, 0) - mu(0, 0));
      const Eigen::VectorXd vi = al.d * fa.basis.transpose() * (mu(i, a) - mu(0, a));
      r.standardized_gap_gap = std::max(r.standardized_gap_gap, (ui - vi).cwiseAbs().maxCoeff());
    }
  }
  return finish(r, tol,
                {{"whitened class-mean gaps agree", std::nullopt, std::nullopt, r.standardized_gap_gap},
                 {"relative covariance spectra agree", std::nullopt, std::nullopt, r.variance_ratio_gap},
                 {"class weight ratios agree", std::nullopt, std::nullopt, r.weight_ratio_gap}});
}

IdealityVerdict check_ideal(const FairDistribution& dist, double tol) {
  return dist.is_binary_univariate() ? check_ideal_univariate(dist, tol) : check_ideal_multivariate(dist, tol);
}

JointWeights reweigh_kamiran(const JointWeights& w) {
  const auto& q = w.table();
  Eigen::MatrixXd out(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index a = 0; a < q.cols(); ++a) {
      long double py = 0.0L, pa = 0.0L;
      for (Eigen::Index k = 0; k < q.cols(); ++k) py += q(i, k);
      for (Eigen::Index k = 0; k < q.rows(); ++k) pa += q(k, a);
      out(i, a) = static_cast<double>(py * pa);
    }
  }
  const double total = out.sum();
  if (std::abs(total - 1.0) > kWeightSumTol / 4) out /= total;
  return JointWeights(out);
}

PinskerBounds pinsker_bounds(double kl) {
  if (!(kl >= 0.0)) throw Error(ErrorCode::NegativeKL, "KL must be >= 0, got " + std::to_string(kl));
  return {std::sqrt(2.0 * kl), std::sqrt(8.0 * kl)};
}

}  // namespace fairsteer
