#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fairsteer/error.hpp"
#include "fairsteer/feature_io.hpp"
#include "fairsteer/moments.hpp"
#include "fairsteer/spec_io.hpp"
#include "oracles.hpp"

using namespace fairsteer;
namespace fs = std::filesystem;

namespace {

SampleSet two_point_cells(double lo, double hi) {
  SampleSet s;
  s.features.resize(8, 1);
  int r = 0;
  for (const char* c : {"0", "1"})
    for (const char* g : {"0", "1"})
      for (double v : {lo, hi}) {
        s.features(r++, 0) = v;
        s.classes.push_back(c);
        s.groups.push_back(g);
      }
  return s;
}

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "fairsteer_tests";
  fs::create_directories(dir);
  return dir / name;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fairsteer::Error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(FitFromSamples, TwoPointMoments) {
  const auto d = fit_from_samples(two_point_cells(0.0, 2.0));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t a = 0; a < 2; ++a) {
      EXPECT_DOUBLE_EQ(d.subgroup(i, a).mean(), 1.0);
      EXPECT_NEAR(d.subgroup(i, a).stddev(), std::sqrt(2.0), 1e-15);
      EXPECT_DOUBLE_EQ(d.q(i, a), 0.25);
    }
}

TEST(FitFromSamples, LogTransform) {
  const auto d = fit_from_samples(two_point_cells(std::exp(0.0), std::exp(2.0)), {true});
  EXPECT_NEAR(d.subgroup(0, 0).mean(), 1.0, 1e-15);
  EXPECT_NEAR(d.subgroup(1, 1).stddev(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(code_of([] { (void)fit_from_samples(two_point_cells(-1.0, 2.0), {true}); }), ErrorCode::NonPositiveFeature);
}

TEST(FitFromSamples, MomentReconstructionIsIdentity) {
  // Two points m - s/sqrt(2), m + s/sqrt(2) have mean m and unbiased std s.
  const std::array<double, 4> m = {-1.0, 2.5, 0.3, 4.0}, s = {0.5, 1.5, 2.0, 0.7};
  SampleSet rows;
  rows.features.resize(8, 1);
  int r = 0;
  for (std::size_t k = 0; k < 4; ++k)
    for (double sign : {-1.0, 1.0}) {
      rows.features(r++, 0) = m[k] + sign * s[k] / std::sqrt(2.0);
      rows.classes.push_back(std::to_string(k % 2));
      rows.groups.push_back(std::to_string(k / 2));
    }
  const auto d = fit_from_samples(rows);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(d.subgroup(k % 2, k / 2).mean(), m[k], 1e-14);
    EXPECT_NEAR(d.subgroup(k % 2, k / 2).stddev(), s[k], 1e-14);
  }
}

TEST(FitFromSamples, MonteCarloRecovery) {
  const oracle::Binary truth{{-1.0, 1.5, 0.5, 3.0}, {1.0, 0.6, 2.0, 1.2}, {0.25, 0.25, 0.25, 0.25}};
  const int n = 100000;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  SampleSet rows;
  rows.features.resize(n, 1);
  for (int r = 0; r < n; ++r) {
    const int k = r % 4;
    rows.features(r, 0) = truth.m[k] + truth.s[k] * z(rng);
    rows.classes.push_back(std::to_string(k % 2));
    rows.groups.push_back(std::to_string(k / 2));
  }
  const auto d = fit_from_samples(rows);
  const double per_cell = n / 4.0;
  for (int k = 0; k < 4; ++k) {
    const auto& g = d.subgroup(k % 2, k / 2);
    EXPECT_NEAR(g.mean(), truth.m[k], 3 * truth.s[k] / std::sqrt(per_cell));
    EXPECT_NEAR(g.stddev(), truth.s[k], 3 * truth.s[k] / std::sqrt(2 * per_cell));
  }
}

TEST(FitFromSamples, EmptyCell) {
  auto s = two_point_cells(0, 1);
  s.classes.back() = "0";  // cell (1,1) now has a single sample
  EXPECT_EQ(code_of([&] { (void)fit_from_samples(s); }), ErrorCode::EmptyCell);
}

TEST(FitFromSamples, MultivariateCovariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  SampleSet s;
  const int n = 4000;
  s.features.resize(n, 2);
  for (int r = 0; r < n; ++r) {
    const double u = z(rng), v = z(rng);
    s.features(r, 0) = u;
    s.features(r, 1) = 0.5 * u + v;
    s.classes.push_back(std::to_string(r % 2));
    s.groups.push_back(std::to_string((r / 2) % 2));
  }
  const auto d = fit_from_samples(s);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_NEAR(d.subgroup(0, 0).cov()(0, 1), 0.5, 0.1);
}

TEST(OrderedLabels, NumericThenLexicographic) {
  EXPECT_EQ(ordered_labels({"10", "2", "1", "2"}), (std::vector<std::string>{"1", "2", "10"}));
  EXPECT_EQ(ordered_labels({"b", "a", "10"}), (std::vector<std::string>{"10", "a", "b"}));
}

TEST(SpecIo, RoundTripUnivariate) {
  const auto d = FairDistribution::binary_univariate({0.1, -2, 3.3, 4}, {1, 0.25, 3, 1.125}, {0.3, 0.2, 0.1, 0.4});
  const auto back = parse_distribution(serialize_distribution(d));
  EXPECT_EQ(back, d);
}

TEST(SpecIo, RoundTripMultivariate) {
  Eigen::MatrixXd c(2, 2);
  c << 2.0, 0.3, 0.3, 1.0;
  const SubgroupGaussian g(Eigen::Vector2d(1.0, -1.0), c);
  const FairDistribution d(JointWeights::uniform(2, 2), {g, g, g, g}, {"neg", "pos"}, {"a", "b"});
  const auto back = parse_distribution(serialize_distribution(d));
  EXPECT_EQ(back, d);
}

TEST(SpecIo, NestedCovAndMissingKeys) {
  const std::string ok = R"({"classes":[0,1],"groups":["x"],"q":{"0,x":0.5,"1,x":0.5},
    "subgroups":{"0,x":{"mean_vec":[0,0],"cov":[[1,0],[0,1]]},"1,x":{"mean_vec":[1,1],"cov":[1,0,0,2]}}})";
  const auto d = parse_distribution(ok);
  EXPECT_DOUBLE_EQ(d.subgroup(1, 0).cov()(1, 1), 2.0);
  EXPECT_EQ(code_of([] { (void)parse_distribution("{not json"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              (void)parse_distribution(R"({"classes":["0"],"groups":["0"],"q":{"0,1":1},"subgroups":{"0,0":{"mean":0,"std":1}}})");
            }),
            ErrorCode::KeyMismatch);
}

TEST(SamplesCsv, ParseAndWrite) {
  const auto s = parse_samples_csv("x_0,x_1,class,group\n1,2,a,g\n3,4.5,b,h\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.features(1, 1), 4.5);
  EXPECT_EQ(s.classes[1], "b");
  EXPECT_EQ(code_of([] { (void)parse_samples_csv("a,b\n1,2\n"); }), ErrorCode::ParseError);
  const auto p = temp_path("samples.csv");
  write_samples_csv(p, s);
  const auto back = read_samples_csv(p);
  EXPECT_EQ(back.features, s.features);
  EXPECT_EQ(back.groups, s.groups);
}

TEST(FeatureIo, BinaryAndCsvRoundTrip) {
  Eigen::MatrixXd x(3, 2);
  x << 1.0, -2.5, 0.125, 4.0, 7.0, 8.0;
  const auto bin = temp_path("m.efaf");
  write_feature_matrix(bin, x, FeatureFormat::Binary);
  EXPECT_EQ(read_feature_matrix(bin), x);
  EXPECT_EQ(fs::file_size(bin), 12u + 6u * 4u);
  const auto csv = temp_path("m.csv");
  write_feature_matrix(csv, x, format_for_path(csv));
  EXPECT_EQ(read_feature_matrix(csv), x);
}

TEST(FeatureIo, LabelCsv) {
  const auto p = temp_path("labels.csv");
  write_file_atomic(p, "row,label,group\n1,nurse,f\n0,surgeon,m\n2,nurse,m\n");
  const auto t = read_label_csv(p, 3);
  EXPECT_EQ(t.class_names, (std::vector<std::string>{"nurse", "surgeon"}));
  EXPECT_EQ(t.labels, (std::vector<std::size_t>{1, 0, 0}));
  EXPECT_EQ(t.groups, (std::vector<std::size_t>{1, 0, 1}));
  EXPECT_EQ(code_of([&] { (void)read_label_csv(p, 4); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([] { (void)read_label_csv("/nonexistent/labels.csv", 1); }), ErrorCode::IoError);
}
