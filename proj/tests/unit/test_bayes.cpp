#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fairsteer/bayes.hpp"
#include "fairsteer/error.hpp"
#include "oracles.hpp"

using namespace fairsteer;

namespace {

// Monte-Carlo error of the t-threshold rule, labels drawn from q.
double mc_error(const oracle::Binary& b, const DecisionRegions& r, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> cell(b.q.begin(), b.q.end());
  std::normal_distribution<double> z;
  int wrong = 0;
  for (int k = 0; k < n; ++k) {
    const int c = cell(rng);
    const double x = b.m[c] + b.s[c] * z(rng);
    const int cls = c % 2, grp = c / 2;
    wrong += r.predicts_one(grp, x) != (cls == 1);
  }
  return static_cast<double>(wrong) / n;
}

}  // namespace

TEST(CostThreshold, Examples) {
  EXPECT_DOUBLE_EQ(cost_threshold(CostMatrix::zero_one()), 0.5);
  EXPECT_DOUBLE_EQ(cost_threshold(CostMatrix::binary(0, 1, 3, 0)), 0.75);
  EXPECT_DOUBLE_EQ(cost_threshold(CostMatrix::binary(0, 3, 1, 0)), 0.25);
  try {
    (void)cost_threshold(CostMatrix::binary(1, 1, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateCost);
  }
}

TEST(DecisionRegions, SymmetricHomoskedastic) {
  const auto d = FairDistribution::binary_univariate({-1, 1, -1, 1}, {1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25});
  const auto r = decision_regions(d, 0.5);
  ASSERT_EQ(r.per_group[0].size(), 1u);
  EXPECT_NEAR(r.per_group[0][0].lo, 0.0, 1e-15);
  EXPECT_EQ(r.per_group[0][0].hi, INFINITY);
}

TEST(DecisionRegions, IdenticalSubgroupsGiveWholeLine) {
  const auto d = FairDistribution::binary_univariate({0, 0, 0, 0}, {1, 1, 1, 1}, {0.2, 0.3, 0.2, 0.3});
  const auto r = decision_regions(d, 0.5);
  for (int a = 0; a < 2; ++a) {
    ASSERT_EQ(r.per_group[a].size(), 1u);
    EXPECT_EQ(r.per_group[a][0].lo, -INFINITY);
    EXPECT_EQ(r.per_group[a][0].hi, INFINITY);
  }
  const auto none = decision_regions(FairDistribution::binary_univariate({0, 0, 0, 0}, {1, 1, 1, 1}, {0.3, 0.2, 0.3, 0.2}), 0.5);
  EXPECT_TRUE(none.per_group[0].empty());
}

TEST(DecisionRegions, WiderClassOneGivesOuterIntervals) {
  const auto d = FairDistribution::binary_univariate({0, 0, 0, 0}, {1, 2, 1, 2}, {0.25, 0.25, 0.25, 0.25});
  const auto r = decision_regions(d, 0.5);
  ASSERT_EQ(r.per_group[0].size(), 2u);
  // Root of x^2 (1/2 - 1/8) = log 2: x0 = sqrt(8 log 2 / 3).
  const double x0 = std::sqrt(8.0 * std::log(2.0) / 3.0);
  EXPECT_NEAR(r.per_group[0][0].hi, -x0, 1e-12);
  EXPECT_NEAR(r.per_group[0][1].lo, x0, 1e-12);
  const auto b = oracle::from_dist(d);
  for (double x = -6; x <= 6; x += 0.001) {
    if (std::abs(std::abs(x) - x0) < 1e-9) continue;
    EXPECT_EQ(r.predicts_one(0, x), oracle::eta(b, x, 0) >= 0.5) << x;
  }
}

TEST(DecisionRegions, MatchesPointwisePosteriorOnGrid) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ut(0.05, 0.95);
  for (int inst = 0; inst < 30; ++inst) {
    const auto b = oracle::random_binary(rng, false);
    const double t = ut(rng);
    const auto r = decision_regions(b.dist(), t);
    for (int a = 0; a < 2; ++a) {
      EXPECT_LE(r.per_group[a].size(), 2u);
      const double lo = std::min(b.m[2 * a], b.m[2 * a + 1]) - 6 * std::max(b.s[2 * a], b.s[2 * a + 1]);
      const double hi = std::max(b.m[2 * a], b.m[2 * a + 1]) + 6 * std::max(b.s[2 * a], b.s[2 * a + 1]);
      int mismatches = 0;
      for (int k = 0; k < 10000; ++k) {
        const double x = lo + (hi - lo) * k / 9999.0;
        const double e = oracle::eta(b, x, a);
        if (!std::isfinite(e) || std::abs(e - t) < 1e-9) continue;
        mismatches += r.predicts_one(a, x) != (e >= t);
      }
      EXPECT_EQ(mismatches, 0) << "instance " << inst << " group " << a;
    }
  }
}

TEST(PositiveRate, Examples) {
  const auto d = FairDistribution::binary_univariate({-1, 1, 0, 0}, {1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25});
  DecisionRegions all{{{{-INFINITY, INFINITY}}, {{-INFINITY, INFINITY}}}};
  EXPECT_DOUBLE_EQ(positive_rate(d, all, 0), 1.0);
  DecisionRegions half{{{{0.0, INFINITY}}, {{0.0, INFINITY}}}};
  EXPECT_DOUBLE_EQ(positive_rate(d, half, 1, 0), 0.5);
  EXPECT_NEAR(positive_rate(d, half, 0), 0.5, 1e-15);
  try {
    (void)positive_rate(d, half, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownGroup);
  }
}

TEST(FairnessReport, SymmetricInstance) {
  const oracle::Binary b{{-1, 1, -1, 1}, {1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25}};
  const auto r = fairness_report(b.dist(), 0.5);
  EXPECT_NEAR(r.bayes_error, oracle::normal_cdf(-1.0), 1e-12);
  EXPECT_NEAR(r.bayes_error, 0.158655, 1e-6);
  EXPECT_EQ(r.delta_dp, 0.0);
  EXPECT_EQ(r.delta_eo, 0.0);
  const int n = 10000000;
  const double mc = mc_error(b, decision_regions(b.dist(), 0.5), n, 1);
  const double se = std::sqrt(r.bayes_error * (1 - r.bayes_error) / n);
  EXPECT_NEAR(mc, r.bayes_error, 3 * se);
}

TEST(FairnessReport, IdenticalGroupsAreFairAtEveryThreshold) {
  const auto d = FairDistribution::binary_univariate({-0.3, 1.2, -0.3, 1.2}, {0.7, 1.9, 0.7, 1.9}, {0.3, 0.2, 0.3, 0.2});
  for (double t = 0.05; t < 0.96; t += 0.05) {
    const auto r = fairness_report(d, t);
    EXPECT_EQ(r.delta_dp, 0.0);
    EXPECT_EQ(r.delta_eo, 0.0);
  }
}

TEST(FairnessReport, MatchesMonteCarloError) {
  std::mt19937_64 rng(23);
  const int n = 1000000;
  for (int inst = 0; inst < 5; ++inst) {
    const auto b = oracle::random_binary(rng, false);
    const auto r = fairness_report(b.dist(), 0.5);
    const double mc = mc_error(b, decision_regions(b.dist(), 0.5), n, 100 + inst);
    const double se = std::sqrt(std::max(r.bayes_error * (1 - r.bayes_error), 1e-12) / n);
    EXPECT_NEAR(mc, r.bayes_error, 4 * se + 1e-12) << inst;
  }
}

TEST(FairnessReport, AffineInvariance) {
  std::mt19937_64 rng(29);
  for (int inst = 0; inst < 50; ++inst) {
    auto b = oracle::random_binary(rng, false);
    const auto r0 = fairness_report(b.dist(), 0.4);
    const double s = 0.3 + 3.0 * (inst % 7) / 7.0, off = -2.0 + inst * 0.1;
    for (int k = 0; k < 4; ++k) {
      b.m[k] = s * b.m[k] + off;
      b.s[k] *= s;
    }
    const auto r1 = fairness_report(b.dist(), 0.4);
    EXPECT_NEAR(r0.delta_dp, r1.delta_dp, 1e-9);
    EXPECT_NEAR(r0.delta_eo, r1.delta_eo, 1e-9);
    EXPECT_NEAR(r0.bayes_error, r1.bayes_error, 1e-9);
  }
}

TEST(FairnessReport, RejectsDegenerateThreshold) {
  const auto d = FairDistribution::binary_univariate({0, 1, 0, 1}, {1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_THROW((void)fairness_report(d, 0.0), Error);
  EXPECT_THROW((void)fairness_report(d, 1.0), Error);
}

TEST(FairnessReport, CsvRow) {
  FairnessReport r;
  r.threshold = 0.5;
  r.bayes_error = 0.25;
  r.delta_dp = 0.125;
  r.delta_eo = 0.0;
  EXPECT_EQ(fairness_csv_header(r), "t,BE,dDP,dEO");
  EXPECT_EQ(fairness_csv_row(r), "0.5,0.25,0.125,0");
}

TEST(TprGap, PerfectAndExtremeClassifiers) {
  const std::vector<std::size_t> y = {0, 0, 1, 1, 2, 2}, a = {0, 1, 0, 1, 0, 1};
  const auto perfect = tpr_gap_multiclass(y, a, y);
  for (const auto& [c, g] : perfect.gap) EXPECT_EQ(g, 0.0);
  auto preds = y;
  preds[2] = 0;  // class 1, group 0 wrong
  const auto r = tpr_gap_multiclass(y, a, preds);
  EXPECT_EQ(r.gap.at(1), 1.0);
  EXPECT_EQ(r.gap.at(0), 0.0);
  EXPECT_THROW((void)tpr_gap_multiclass(y, a, {0}), Error);
}

TEST(TprGap, OmitsClassesWithEmptyCell) {
  const std::vector<std::size_t> y = {0, 0, 1}, a = {0, 1, 0};
  const auto r = tpr_gap_multiclass(y, a, y);
  EXPECT_EQ(r.gap.count(1), 0u);
  EXPECT_EQ(r.omitted, std::vector<std::size_t>{1});
}

TEST(TprGap, MatchesHandCountedConfusionTable) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> uc(0, 3), ug(0, 1);
  std::vector<std::size_t> y(400), a(400), p(400);
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = uc(rng);
    a[k] = ug(rng);
    p[k] = uc(rng);
  }
  const auto r = tpr_gap_multiclass(y, a, p);
  for (std::size_t c = 0; c < 4; ++c) {
    int n0 = 0, n1 = 0, h0 = 0, h1 = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (y[k] != c) continue;
      (a[k] ? n1 : n0)++;
      if (p[k] == c) (a[k] ? h1 : h0)++;
    }
    EXPECT_NEAR(r.gap.at(c), std::abs(double(h1) / n1 - double(h0) / n0), 1e-15);
  }
}

TEST(PredictClass, MatchesUnivariatePosterior) {
  const auto d = FairDistribution::binary_univariate({0, 2, 0, 1}, {1, 1.5, 1, 1}, {0.25, 0.25, 0.25, 0.25});
  for (double x = -3; x <= 5; x += 0.1) {
    for (std::size_t g = 0; g < 2; ++g) {
      const double e = posterior(d, x, g);
      if (std::abs(e - 0.5) < 1e-9) continue;
      EXPECT_EQ(predict_class(d, Eigen::VectorXd::Constant(1, x), g), e > 0.5 ? 1u : 0u);
    }
  }
}
