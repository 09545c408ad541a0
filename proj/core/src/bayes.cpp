#include "fairsteer/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fairsteer/error.hpp"
#include "fairsteer/gaussian.hpp"

namespace fairsteer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long double kDiscTol = 1e-14L;

void check_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0,1)");
}

void check_group(const FairDistribution& dist, std::size_t group) {
  if (group >= dist.num_groups()) throw Error(ErrorCode::UnknownGroup, "group index " + std::to_string(group));
}

std::vector<Interval> solve_region(const SubgroupGaussian& g0, const SubgroupGaussian& g1, double q0, double q1,
                                   double t) {
  using ld = long double;
  const ld m0 = g0.mean(), m1 = g1.mean();
  const ld v0 = g0.variance(), v1 = g1.variance();
  const ld a = 1.0L / (2.0L * v0) - 1.0L / (2.0L * v1);
  const ld b = m1 / v1 - m0 / v0;
  const ld c = m0 * m0 / (2.0L * v0) - m1 * m1 / (2.0L * v1) + 0.5L * std::log(v0 / v1) + std::log((ld)q1 / (ld)q0) -
               std::log((ld)t / (1.0L - (ld)t));

  if (a == 0.0L) {
    if (b == 0.0L) return c >= 0.0L ? std::vector<Interval>{{-kInf, kInf}} : std::vector<Interval>{};
    const auto x0 = static_cast<double>(-c / b);
    return b > 0.0L ? std::vector<Interval>{{x0, kInf}} : std::vector<Interval>{{-kInf, x0}};
  }

  ld disc = b * b - 4.0L * a * c;
  const ld scale = std::max(b * b, std::abs(4.0L * a * c));
  if (std::abs(disc) <= kDiscTol * scale) disc = 0.0L;
  if (disc <= 0.0L) {
    // Tangent or no real root: f keeps the sign of a except on a null set.
    return a > 0.0L ? std::vector<Interval>{{-kInf, kInf}} : std::vector<Interval>{};
  }
  const ld s = std::sqrt(disc);
  const ld qq = -0.5L * (b + (b >= 0.0L ? s : -s));
  ld r1 = qq / a;
  ld r2 = qq != 0.0L ? c / qq : -r1;
  if (r1 > r2) std::swap(r1, r2);
  const auto lo = static_cast<double>(r1);
  const auto hi = static_cast<double>(r2);
  if (a > 0.0L) {
    std::vector<Interval> out;
    if (lo > -kInf) out.push_back({-kInf, lo});
    if (hi < kInf) out.push_back({hi, kInf});
    return out;
  }
  return {{lo, hi}};
}

double region_mass(const std::vector<Interval>& region, const SubgroupGaussian& g) {
  double m = 0.0;
  for (const auto& iv : region) m += interval_mass(iv.lo, iv.hi, g);
  return std::clamp(m, 0.0, 1.0);
}

}  // namespace

CostMatrix CostMatrix::binary(double c00, double c01, double c10, double c11) {
  CostMatrix m{Eigen::MatrixXd(2, 2)};
  m.c << c00, c01, c10, c11;
  return m;
}

CostMatrix CostMatrix::zero_one(std::size_t classes) {
  const auto k = static_cast<Eigen::Index>(classes);
  return CostMatrix{Eigen::MatrixXd::Ones(k, k) - Eigen::MatrixXd::Identity(k, k)};
}

double cost_threshold(const CostMatrix& cost) {
  if (cost.c.rows() != 2 || cost.c.cols() != 2) throw Error(ErrorCode::InvalidArgument, "threshold needs a 2x2 cost matrix");
  const double num = cost.c(1, 0) - cost.c(0, 0);
  const double den = num + cost.c(0, 1) - cost.c(1, 1);
  if (!(num > 0.0) || !(cost.c(0, 1) > cost.c(1, 1)) || !(den > 0.0)) {
    throw Error(ErrorCode::DegenerateCost, "cost matrix needs c10 > c00 and c01 > c11");
  }
  return num / den;
}

bool DecisionRegions::predicts_one(std::size_t group, double x) const {
  for (const auto& iv : per_group.at(group)) {
    if (x > iv.lo && x < iv.hi) return true;
  }
  return false;
}

DecisionRegions decision_regions(const FairDistribution& dist, double t) {
  require_binary_univariate(dist, "decision_regions");
  check_threshold(t);
  DecisionRegions r;
  for (std::size_t a = 0; a < 2; ++a) {
    r.per_group.push_back(solve_region(dist.subgroup(0, a), dist.subgroup(1, a), dist.q(0, a), dist.q(1, a), t));
  }
  return r;
}

double posterior(const FairDistribution& dist, double x, std::size_t group) {
  require_binary_univariate(dist, "posterior");
  check_group(dist, group);
  const double l0 = std::log(dist.q(0, group)) + gaussian_logpdf(x, dist.subgroup(0, group));
  const double l1 = std::log(dist.q(1, group)) + gaussian_logpdf(x, dist.subgroup(1, group));
  return 1.0 / (1.0 + std::exp(l0 - l1));
}

double positive_rate(const FairDistribution& dist, const DecisionRegions& regions, std::size_t group,
                     std::optional<std::size_t> cls) {
  check_group(dist, group);
  if (group >= regions.per_group.size()) throw Error(ErrorCode::UnknownGroup, "no region for group");
  const auto& region = regions.per_group[group];
  if (cls) {
    if (*cls >= dist.num_classes()) throw Error(ErrorCode::InvalidArgument, "class index out of range");
    return region_mass(region, dist.subgroup(*cls, group));
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < dist.num_classes(); ++i) {
    num += dist.q(i, group) * region_mass(region, dist.subgroup(i, group));
    den += dist.q(i, group);
  }
  return num / den;
}

FairnessReport evaluate_regions(const FairDistribution& dist, const DecisionRegions& regions, double t) {
  require_binary_univariate(dist, "fairness_report");
  FairnessReport r;
  r.threshold = t;
  double err = 0.0;
  double pr[2], tpr[2];
  for (std::size_t a = 0; a < 2; ++a) {
    const double m0 = region_mass(regions.per_group.at(a), dist.subgroup(0, a));
    const double m1 = region_mass(regions.per_group.at(a), dist.subgroup(1, a));
    err += dist.q(0, a) * m0 + dist.q(1, a) * (1.0 - m1);
    pr[a] = (dist.q(0, a) * m0 + dist.q(1, a) * m1) / (dist.q(0, a) + dist.q(1, a));
    tpr[a] = m1;
  }
  r.bayes_error = std::clamp(err, 0.0, 1.0);
  r.delta_dp = std::abs(pr[0] - pr[1]);
  r.delta_eo = std::abs(tpr[0] - tpr[1]);
  return r;
}

FairnessReport fairness_report(const FairDistribution& dist, double t) {
  return evaluate_regions(dist, decision_regions(dist, t), t);
}

std::string fairness_csv_header(const FairnessReport& r) {
  std::string h = "t,BE,dDP,dEO";
  for (const auto& [name, gap] : r.per_class_tpr_gap) h += ",gap_" + name;
  return h;
}

std::string fairness_csv_row(const FairnessReport& r) {
  std::ostringstream out;
  out.precision(12);
  out << r.threshold << ',' << r.bayes_error << ',' << r.delta_dp << ',' << r.delta_eo;
  for (const auto& [name, gap] : r.per_class_tpr_gap) out << ',' << gap;
  return out.str();
}

TprGaps tpr_gap_multiclass(const std::vector<std::size_t>& labels, const std::vector<std::size_t>& groups,
                           const std::vector<std::size_t>& preds) {
  if (labels.size() != groups.size() || labels.size() != preds.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels, groups and preds must have equal length");
  }
  std::size_t nc = 0, ng = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    nc = std::max(nc, labels[k] + 1);
    ng = std::max(ng, groups[k] + 1);
  }
  std::vector<double> total(nc * ng, 0.0), hit(nc * ng, 0.0);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const std::size_t cell = labels[k] * ng + groups[k];
    total[cell] += 1.0;
    if (preds[k] == labels[k]) hit[cell] += 1.0;
  }
  TprGaps out;
  for (std::size_t y = 0; y < nc; ++y) {
    double lo = kInf, hi = -kInf;
    bool complete = true;
    for (std::size_t a = 0; a < ng; ++a) {
      const std::size_t cell = y * ng + a;
      if (total[cell] == 0.0) {
        complete = false;
        break;
      }
      const double tpr = hit[cell] / total[cell];
      lo = std::min(lo, tpr);
      hi = std::max(hi, tpr);
    }
    if (complete && ng > 1) {
      out.gap[y] = hi - lo;
    } else {
      out.omitted.push_back(y);
    }
  }
  return out;
}

std::size_t predict_class(const FairDistribution& dist, const Eigen::VectorXd& x, std::size_t group) {
  check_group(dist, group);
  if (static_cast<std::size_t>(x.size()) != dist.dim()) throw Error(ErrorCode::DimensionMismatch, "feature length");
  std::size_t best = 0;
  double best_score = -kInf;
  for (std::size_t i = 0; i < dist.num_classes(); ++i) {
    const auto& g = dist.subgroup(i, group);
    const Eigen::LLT<Eigen::MatrixXd> llt(g.cov());
    const Eigen::VectorXd dm = x - g.mean_vec();
    const double score = std::log(dist.q(i, group)) - 0.5 * dm.dot(llt.solve(dm)) -
                         llt.matrixLLT().diagonal().array().log().sum();
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

}  // namespace fairsteer
