#include "fairsteer/steer_univariate.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "fairsteer/error.hpp"

namespace fairsteer {

namespace {

struct Params {
  double m[2][2];  // [class][group]
  double v[2][2];
  double q[2][2];
};

Params params_of(const FairDistribution& dist) {
  Params p{};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t a = 0; a < 2; ++a) {
      const auto& g = dist.subgroup(i, a);
      p.m[i][a] = g.mean();
      p.v[i][a] = g.variance();
      p.q[i][a] = dist.q(i, a);
      if (!(g.stddev() >= kEpsStd)) throw Error(ErrorCode::DegenerateStd, "subgroup std below floor");
    }
  }
  return p;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be finite and > 0");
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Affirmative: return "affirmative";
    case Method::AllSubgroups: return "all";
    case Method::MeanMatching: return "mean-match";
    case Method::Multivariate: return "multivariate";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  for (Method m : {Method::Affirmative, Method::AllSubgroups, Method::MeanMatching, Method::Multivariate}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

void require_weight_ratio(const FairDistribution& dist, const char* operation) {
  const double r = weight_ratio_residual(dist.weights());
  if (r > kWeightRatioTol) {
    throw Error(ErrorCode::WeightRatioViolation, std::string(operation) + ": class weight ratios differ across groups by " +
                                                     std::to_string(r) + "; reweigh first");
  }
}

InterventionResult make_intervention_result(Method method, const FairDistribution& original, FairDistribution steered,
                                            std::optional<double> gamma, double threshold) {
  auto div = divergence_report(steered, original);
  const auto pinsker = pinsker_bounds(std::max(div.kl, 0.0));
  InterventionResult r{method, original, std::move(steered), gamma, std::nullopt, div, std::nullopt, std::nullopt,
                       pinsker};
  if (original.is_binary_univariate()) {
    r.report_before = fairness_report(original, threshold);
    r.report_after = fairness_report(r.steered, threshold);
  }
  return r;
}

std::string diagnostics_csv_header() {
  return "method,gamma_star,KL,JS,BE_before,BE_after,dDP_before,dDP_after,dEO_before,dEO_after";
}

std::string diagnostics_csv_row(const InterventionResult& r) {
  std::ostringstream out;
  out.precision(12);
  const auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
    out << ',';
  };
  out << method_name(r.method) << ',';
  opt(r.gamma_star);
  out << r.divergences.kl << ',';
  opt(r.divergences.js);
  const auto& b = r.report_before;
  const auto& a = r.report_after;
  if (b && a) {
    out << b->bayes_error << ',' << a->bayes_error << ',' << b->delta_dp << ',' << a->delta_dp << ',' << b->delta_eo
        << ',' << a->delta_eo;
  } else {
    out << ",,,,,";
  }
  return out.str();
}

double affirmative_gamma(const FairDistribution& dist) {
  require_binary_univariate(dist, "affirmative_univariate");
  require_weight_ratio(dist, "affirmative_univariate");
  const Params p = params_of(dist);
  const double d1 = p.m[0][1] - p.m[1][1];
  const double d0 = p.m[0][0] - p.m[1][0];
  const double q00 = p.q[0][0], q10 = p.q[1][0];
  const double v00 = p.v[0][0], v10 = p.v[1][0], v01 = p.v[0][1], v11 = p.v[1][1];
  const double a2 = d1 * d1 + v01 + v11 + (q10 * v00 / (q00 * v10)) * v11 + (q00 * v10 / (q10 * v00)) * v01;
  const double b = -d1 * d0;
  const double c = -(q00 + q10) * (v00 / q00 + v10 / q10);
  const double sq = std::sqrt(b * b - 4.0 * a2 * c);
  return -b >= 0.0 ? (-b + sq) / (2.0 * a2) : 2.0 * c / (-b - sq);
}

FairDistribution affirmative_at_gamma(const FairDistribution& dist, double gamma) {
  require_binary_univariate(dist, "affirmative_at_gamma");
  check_gamma(gamma);
  const Params p = params_of(dist);
  const double d1 = p.m[0][1] - p.m[1][1];
  const double w0 = p.q[0][0] / p.v[0][0];
  const double w1 = p.q[1][0] / p.v[1][0];
  const double m10 = (w0 * (p.m[0][0] - gamma * d1) + w1 * p.m[1][0]) / (w0 + w1);
  const double m00 = m10 + gamma * d1;
  const double s00 = gamma * std::sqrt(p.v[0][1]);
  const double s10 = gamma * std::sqrt(p.v[1][1]);
  return dist.with_subgroup(0, 0, SubgroupGaussian(m00, s00)).with_subgroup(1, 0, SubgroupGaussian(m10, s10));
}

InterventionResult affirmative_univariate(const FairDistribution& dist, double threshold) {
  const double gamma = affirmative_gamma(dist);
  return make_intervention_result(Method::Affirmative, dist, affirmative_at_gamma(dist, gamma), gamma, threshold);
}

FairDistribution all_subgroups_at_gamma(const FairDistribution& dist, double gamma) {
  require_binary_univariate(dist, "all_subgroups_at_gamma");
  check_gamma(gamma);
  const Params p = params_of(dist);
  const auto& m = p.m;
  const auto& v = p.v;
  const auto& q = p.q;
  const double g2 = gamma * gamma;
  const double den = v[0][1] / q[0][1] + v[1][1] / q[1][1] + g2 * (v[0][0] / q[0][0] + v[1][0] / q[1][0]);
  const double lambda = (gamma * (m[0][0] - m[1][0]) - (m[0][1] - m[1][1])) / den;

  const double m00 = m[0][0] - gamma * lambda * v[0][0] / q[0][0];
  const double m01 = m[0][1] + lambda * v[0][1] / q[0][1];
  const double m10 = m[1][0] + gamma * lambda * v[1][0] / q[1][0];
  const double m11 = m[1][1] - lambda * v[1][1] / q[1][1];

  FairDistribution out = dist;
  const double mean0[2] = {m00, m10};
  const double mean1[2] = {m01, m11};
  for (std::size_t i = 0; i < 2; ++i) {
    const double s0 = std::sqrt((q[i][0] + q[i][1]) / (q[i][0] / v[i][0] + q[i][1] * g2 / v[i][1]));
    out = out.with_subgroup(i, 0, SubgroupGaussian(mean0[i], s0));
    out = out.with_subgroup(i, 1, SubgroupGaussian(mean1[i], gamma * s0));
  }
  return out;
}

double all_subgroups_objective(const FairDistribution& dist, double gamma) {
  require_binary_univariate(dist, "all_subgroups_objective");
  check_gamma(gamma);
  const Params p = params_of(dist);
  const auto& m = p.m;
  const auto& v = p.v;
  const auto& q = p.q;
  const double g2 = gamma * gamma;
  const double den = v[0][1] / q[0][1] + v[1][1] / q[1][1] + g2 * (v[0][0] / q[0][0] + v[1][0] / q[1][0]);
  const double gap = gamma * (m[0][0] - m[1][0]) - (m[0][1] - m[1][1]);
  double total = 0.5 * gap * gap / den;
  for (std::size_t i = 0; i < 2; ++i) {
    const double r = q[i][0] / q[i][1];
    const double w = 0.5 * (q[i][0] + q[i][1]);
    total += w * std::log(r + g2 * v[i][0] / v[i][1]) - w * std::log(r + 1.0) - q[i][1] * std::log(gamma) -
             0.5 * q[i][1] * std::log(v[i][0] / v[i][1]);
  }
  return total;
}

double all_subgroups_gamma(const FairDistribution& dist, const LineSearch& search) {
  require_binary_univariate(dist, "all_subgroups_univariate");
  require_weight_ratio(dist, "all_subgroups_univariate");
  if (!(search.gamma_min > 0.0) || !(search.gamma_max > search.gamma_min) || search.grid_points < 3) {
    throw Error(ErrorCode::InvalidArgument, "line search needs 0 < gamma_min < gamma_max and >= 3 grid points");
  }
  const auto f = [&](double log_g) { return all_subgroups_objective(dist, std::exp(log_g)); };

  double lo = std::log(search.gamma_min);
  double hi = std::log(search.gamma_max);
  constexpr int kMaxWiden = 3;
  const double widen = std::log(1e3);
  for (int attempt = 0;; ++attempt) {
    const std::size_t n = search.grid_points;
    std::vector<double> xs(n), fs(n);
    for (std::size_t k = 0; k < n; ++k) {
      xs[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
      fs[k] = f(xs[k]);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (fs[k] < fs[best] || (fs[k] == fs[best] && std::abs(xs[k]) < std::abs(xs[best]))) best = k;
    }
    const bool at_lo = best == 0;
    const bool at_hi = best == n - 1;
    if (at_lo || at_hi) {
      if (attempt == kMaxWiden) {
        throw Error(ErrorCode::SearchDiverged, "objective minimum sits at the search boundary gamma = " +
                                                   std::to_string(std::exp(xs[best])) + "; widen the gamma range");
      }
      if (at_lo) lo -= widen;
      if (at_hi) hi += widen;
      continue;
    }
    // Golden-section refinement in log-gamma between the neighbouring grid points.
    double a = xs[best - 1];
    double b = xs[best + 1];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (std::size_t it = 0; it < search.refine_iters; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = f(d);
      }
    }
    const double x = 0.5 * (a + b);
    return f(x) <= fs[best] ? std::exp(x) : std::exp(xs[best]);
  }
}

InterventionResult all_subgroups_univariate(const FairDistribution& dist, const LineSearch& search, double threshold) {
  const double gamma = all_subgroups_gamma(dist, search);
  return make_intervention_result(Method::AllSubgroups, dist, all_subgroups_at_gamma(dist, gamma), gamma, threshold);
}

InterventionResult mean_matching(const FairDistribution& dist, double threshold) {
  require_binary_univariate(dist, "mean_matching");
  const Params p = params_of(dist);
  const auto& m = p.m;
  const auto& v = p.v;
  const auto& q = p.q;
  const double m1 = (q[0][1] * m[0][1] + q[1][1] * m[1][1]) / (q[0][1] + q[1][1]);
  const double k = (q[0][0] + q[1][0]) * m1;
  const double den = q[0][0] * v[0][0] + q[1][0] * v[1][0];
  if (!(den > 0.0)) throw Error(ErrorCode::DegenerateStd, "group-0 variances vanish");
  const double lambda = (k - q[0][0] * m[0][0] - q[1][0] * m[1][0]) / den;
  FairDistribution out = dist;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& g = dist.subgroup(i, 0);
    out = out.with_subgroup(i, 0, SubgroupGaussian(Eigen::VectorXd::Constant(1, m[i][0] + lambda * v[i][0]), g.cov()));
  }
  return make_intervention_result(Method::MeanMatching, dist, std::move(out), std::nullopt, threshold);
}

}  // namespace fairsteer
