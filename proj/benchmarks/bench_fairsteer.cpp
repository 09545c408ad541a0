#include <benchmark/benchmark.h>

#include <random>

#include "fairsteer/bayes.hpp"
#include "fairsteer/divergence.hpp"
#include "fairsteer/gaussian.hpp"
#include "fairsteer/multiclass_affine.hpp"
#include "fairsteer/steer_multivariate.hpp"
#include "fairsteer/steer_univariate.hpp"
#include "fairsteer/synthetic.hpp"

using namespace fairsteer;

namespace {

const FairDistribution kDist =
    FairDistribution::binary_univariate({0.0, 1.0, 0.3, 2.2}, {1.0, 1.4, 0.6, 0.9}, {0.2, 0.3, 0.2, 0.3});

FairDistribution multivariate(int d) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<SubgroupGaussian> cells;
  for (int k = 0; k < 4; ++k) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = z(rng);
    Eigen::VectorXd mu(d);
    for (int j = 0; j < d; ++j) mu(j) = z(rng);
    cells.emplace_back(mu, m * m.transpose() / d + 0.3 * Eigen::MatrixXd::Identity(d, d));
  }
  Eigen::MatrixXd w(2, 2);
  w << 0.2, 0.2, 0.3, 0.3;
  return FairDistribution(JointWeights(w), cells);
}

}  // namespace

static void BM_NormalCdf(benchmark::State& st) {
  double x = -3.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(normal_cdf(x));
    x = x > 3.0 ? -3.0 : x + 1e-3;
  }
}
BENCHMARK(BM_NormalCdf);

static void BM_FairnessReport(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(fairness_report(kDist, 0.4));
}
BENCHMARK(BM_FairnessReport);

static void BM_JsDivergence(benchmark::State& st) {
  const auto other = kDist.with_subgroup(0, 0, SubgroupGaussian(0.5, 0.8));
  for (auto _ : st) benchmark::DoNotOptimize(js_divergence(other, kDist));
}
BENCHMARK(BM_JsDivergence);

static void BM_Affirmative(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(affirmative_univariate(kDist));
}
BENCHMARK(BM_Affirmative);

static void BM_AllSubgroupsSearch(benchmark::State& st) {
  LineSearch ls;
  ls.grid_points = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(all_subgroups_gamma(kDist, ls));
}
BENCHMARK(BM_AllSubgroupsSearch)->Arg(500)->Arg(2000)->Arg(8000);

static void BM_AffirmativeMultivariate(benchmark::State& st) {
  const auto d = multivariate(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(affirmative_multivariate(d));
}
BENCHMARK(BM_AffirmativeMultivariate)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& st) {
  CorpusOptions o;
  o.rows = static_cast<std::size_t>(st.range(0));
  const auto c = synthesize_corpus(o);
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_pipeline(c.features, c.labels, c.groups));
}
BENCHMARK(BM_Pipeline)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
