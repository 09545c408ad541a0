// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairsteer/bayes.hpp"
#include "fairsteer/divergence.hpp"
#include "fairsteer/ideality.hpp"
#include "fairsteer/steer_multivariate.hpp"
#include "fairsteer/steer_univariate.hpp"
#include "fairsteer_cli/cli.hpp"
#include "fairsteer_cli/scenarios.hpp"
#include "oracles.hpp"

using namespace fairsteer;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int n, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(limit_s)) + " s budget";
  }
  failures += !o.pass;
  std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Affirmative family at fixed gamma with the group-0 class-1 mean solved by hand.
double affirmative_kl(const oracle::Binary& b, double g) {
  const double d1 = b.m[2] - b.m[3];
  const double w0 = b.q[0] / (b.s[0] * b.s[0]), w1 = b.q[1] / (b.s[1] * b.s[1]);
  oracle::Binary s = b;
  s.m[1] = (w0 * (b.m[0] - g * d1) + w1 * b.m[1]) / (w0 + w1);
  s.m[0] = s.m[1] + g * d1;
  s.s[0] = g * b.s[2];
  s.s[1] = g * b.s[3];
  return oracle::kl_binary(s, b);
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d, double floor) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = z(rng);
  return m * m.transpose() / d + floor * Eigen::MatrixXd::Identity(d, d);
}

FairDistribution random_multivariate(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> um(-3.0, 3.0), uw(0.1, 1.0);
  std::vector<SubgroupGaussian> cells;
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd m(d);
    for (int j = 0; j < d; ++j) m(j) = um(rng);
    cells.emplace_back(m, random_spd(rng, d, 0.2));
  }
  const double py0 = uw(rng), py1 = uw(rng), pa0 = uw(rng), pa1 = uw(rng);
  Eigen::MatrixXd w(2, 2);
  w << py0 * pa0, py0 * pa1, py1 * pa0, py1 * pa1;
  return FairDistribution(JointWeights(w / w.sum()), cells);
}

FairDistribution as_multivariate(const FairDistribution& u) {
  std::vector<SubgroupGaussian> cells;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t a = 0; a < 2; ++a)
      cells.emplace_back(Eigen::VectorXd::Constant(1, u.subgroup(i, a).mean()),
                         Eigen::MatrixXd::Constant(1, 1, u.subgroup(i, a).variance()));
  return FairDistribution(u.weights(), cells);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

int run_cli(std::vector<std::string> args, std::string& out_text) {
  args.insert(args.begin(), "fairsteer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  out_text = out.str() + err.str();
  return code;
}

}  // namespace

int main() {
  report(1, "ideality of affirmative and all-subgroups outputs", 30, [] {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto d = oracle::random_binary(rng).dist();
      for (const auto& r : {affirmative_univariate(d), all_subgroups_univariate(d)})
        for (int t = 1; t <= 19; ++t) worst = std::max(worst, fairness_report(r.steered, 0.05 * t).delta_eo);
    }
    return Outcome{worst <= 1e-6, "1000 instances x 2 methods x 19 thresholds, max dEO " + sci(worst)};
  });

  report(2, "closed-form gamma* against brute-force search", 120, [] {
    std::mt19937_64 rng(1002);
    double worst_rel = 0.0, worst_kl = -INFINITY;
    const int n = 4000;
    for (int k = 0; k < 100; ++k) {
      const auto b = oracle::random_binary(rng);
      const auto r = affirmative_univariate(b.dist());
      // Log grid over [1e-3, 1e3], then the same grid density over the best cell.
      double lo = std::log(1e-3), hi = std::log(1e3), best_x = 0, best_f = INFINITY;
      for (int stage = 0; stage < 2; ++stage) {
        const double a = lo, c = hi;
        for (int j = 0; j < n; ++j) {
          const double x = a + (c - a) * j / (n - 1);
          const double f = affirmative_kl(b, std::exp(x));
          if (f < best_f) best_f = f, best_x = x;
        }
        const double step = (c - a) / (n - 1);
        lo = best_x - step;
        hi = best_x + step;
      }
      const double g = std::exp(best_x);
      worst_rel = std::max(worst_rel, std::abs(*r.gamma_star - g) / g);
      worst_kl = std::max(worst_kl, r.divergences.kl - best_f);
    }
    return Outcome{worst_rel <= 1e-4 && worst_kl <= 1e-6,
                   "100 instances, max relative gamma gap " + sci(worst_rel) + ", max KL excess " + sci(worst_kl)};
  });

  report(3, "worked instance mu = (0,1,0,2)", 0, [] {
    const auto d = FairDistribution::binary_univariate({0, 1, 0, 2}, {1, 1, 1, 1}, {0.25, 0.25, 0.25, 0.25});
    const auto r = affirmative_univariate(d);
    const double g = (1 + std::sqrt(33.0)) / 8;
    const double eg = std::abs(*r.gamma_star - g);
    const double e10 = std::abs(r.steered.subgroup(1, 0).mean() - 1.343070);
    const double e00 = std::abs(r.steered.subgroup(0, 0).mean() + 0.343070);
    char buf[160];
    std::snprintf(buf, sizeof buf, "gamma* = %.12f (err %.1e), mu10 = %.6f, mu00 = %.6f", *r.gamma_star, eg,
                  r.steered.subgroup(1, 0).mean(), r.steered.subgroup(0, 0).mean());
    return Outcome{eg <= 1e-12 && e10 <= 1e-5 && e00 <= 1e-5, buf};
  });

  report(4, "objective and KL consistency", 0, [] {
    std::mt19937_64 rng(1004);
    const LineSearch ls;
    double worst_grid = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto b = oracle::random_binary(rng);
      const auto d = b.dist();
      for (std::size_t j = 0; j < ls.grid_points; ++j) {
        const double g = std::exp(std::log(ls.gamma_min) + (std::log(ls.gamma_max) - std::log(ls.gamma_min)) *
                                                               static_cast<double>(j) /
                                                               static_cast<double>(ls.grid_points - 1));
        const double closed = all_subgroups_objective(d, g);
        const double direct = oracle::kl_binary(oracle::from_dist(all_subgroups_at_gamma(d, g)), b);
        worst_grid = std::max(worst_grid, std::abs(closed - direct) / (1 + std::abs(direct)));
      }
    }
    double worst_quad = 0.0;
    std::uniform_real_distribution<double> um(-5, 5), us(0.2, 5);
    for (int k = 0; k < 100; ++k) {
      const double m1 = um(rng), s1 = us(rng), m0 = um(rng), s0 = us(rng);
      const double a = kl_gaussian(SubgroupGaussian(m1, s1), SubgroupGaussian(m0, s0));
      worst_quad = std::max(worst_quad, std::abs(a - oracle::kl_quadrature(m1, s1, m0, s0)));
    }
    return Outcome{worst_grid <= 1e-9 && worst_quad <= 1e-6,
                   "closed form vs steered KL over 20 x 2000 grid points: " + sci(worst_grid) +
                       "; analytic vs quadrature on 100 pairs: " + sci(worst_quad)};
  });

  report(5, "Pinsker bound on equal-opportunity gap", 0, [] {
    std::mt19937_64 rng(1005);
    double worst = -INFINITY, worst_cell = -INFINITY, off_bayes = -INFINITY;
    for (int k = 0; k < 200; ++k) {
      const auto b = oracle::random_binary(rng);
      const auto d = b.dist();
      const auto r = k % 2 ? all_subgroups_univariate(d) : affirmative_univariate(d);
      const double bound = std::sqrt(8.0 * kl_divergence(r.steered, d));
      worst = std::max(worst, evaluate_regions(d, decision_regions(r.steered, 0.5), 0.5).delta_eo - bound);
      // Per-group bound from the class-1 conditionals holds at any threshold.
      const auto s = oracle::from_dist(r.steered);
      double cell = 0.0;
      for (int c : {1, 3}) cell += std::sqrt(oracle::kl_quadrature(s.m[c], s.s[c], b.m[c], b.s[c]) / 2.0);
      for (int t = 1; t <= 19; ++t) {
        const auto h = decision_regions(r.steered, 0.05 * t);
        const double eo = evaluate_regions(d, h, 0.05 * t).delta_eo;
        worst_cell = std::max(worst_cell, eo - cell);
        if (t != 10) off_bayes = std::max(off_bayes, eo - bound);
      }
    }
    return Outcome{worst <= 1e-9 && worst_cell <= 1e-9,
                   "200 pairs, max dEO - sqrt(8 KL) = " + sci(worst) +
                       "; per-group conditional bound over 19 thresholds: " + sci(worst_cell) +
                       " (joint bound off t = 1/2, not asserted: " + sci(off_bayes) + ")"};
  });

  report(6, "multivariate program: d = 1 reduction and d = 2 probes", 300, [] {
    std::mt19937_64 rng(1006);
    double worst_1d = 0.0;
    for (int k = 0; k < 50; ++k) {
      const auto u = oracle::random_binary(rng).dist();
      const auto ref = affirmative_univariate(u);
      const auto r = affirmative_multivariate(as_multivariate(u));
      worst_1d = std::max(worst_1d, std::abs(*r.gamma_star - *ref.gamma_star));
      worst_1d = std::max(worst_1d, std::abs(r.divergences.kl - ref.divergences.kl));
      for (std::size_t i = 0; i < 2; ++i) {
        worst_1d = std::max(worst_1d, std::abs(r.steered.subgroup(i, 0).mean_vec()(0) - ref.steered.subgroup(i, 0).mean()));
        worst_1d = std::max(worst_1d, std::abs(std::sqrt(r.steered.subgroup(i, 0).cov()(0, 0)) -
                                               ref.steered.subgroup(i, 0).stddev()));
      }
    }
    std::normal_distribution<double> z;
    int beaten = 0, probes = 0;
    double margin = INFINITY;
    for (int k = 0; k < 25; ++k) {
      const auto d = random_multivariate(rng, 2);
      const auto r = affirmative_multivariate(d);
      const double best = inner_objective(d, *r.gamma_matrix);
      for (int p = 0; p < 200; ++p) {
        Eigen::MatrixXd probe;
        if (p % 2) {
          probe = random_spd(rng, 2, 0.01) * std::exp(z(rng));
        } else {
          Eigen::MatrixXd e(2, 2);
          e << z(rng), z(rng), 0, z(rng);
          e(1, 0) = e(0, 1);
          probe = *r.gamma_matrix + 0.05 * e;
        }
        const double f = inner_objective(d, probe);
        if (!std::isfinite(f)) continue;
        ++probes;
        margin = std::min(margin, f - best);
        beaten += best > f + 1e-12;
      }
      if (!check_ideal_multivariate(r.steered, 1e-6).is_ideal) ++beaten;
    }
    return Outcome{worst_1d <= 1e-5 && beaten == 0,
                   "d = 1 max deviation " + sci(worst_1d) + " over 50 instances; d = 2: 25 instances, " +
                       std::to_string(probes) + " PSD probes, " + std::to_string(beaten) +
                       " beat the optimizer (min margin " + sci(margin) + ")"};
  });

  report(7, "builtin case studies", 0, [] {
    const auto hd = cli::builtin_scenario("high-dp");
    const auto r = all_subgroups_univariate(hd.dist, {}, hd.threshold);
    const auto af = cli::builtin_scenario("already-fair");
    const auto f = all_subgroups_univariate(af.dist, {}, af.threshold);
    const bool ok = r.report_after->delta_dp <= 1e-6 && r.report_after->bayes_error <= r.report_before->bayes_error &&
                    f.divergences.kl <= 1e-10;
    char buf[200];
    std::snprintf(buf, sizeof buf, "high-dp all: dDP %.4f -> %.2e, BE %.4f -> %.4f; already-fair all: KL %.2e",
                  r.report_before->delta_dp, r.report_after->delta_dp, r.report_before->bayes_error,
                  r.report_after->bayes_error, f.divergences.kl);
    return Outcome{ok, buf};
  });

  report(8, "multi-class embedding steering on a 50000 x 16 corpus", 60, [] {
    const fs::path dir = fs::temp_directory_path() / "fairsteer_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string mat = (dir / "corpus.efaf").string();
    std::string text;
    if (run_cli({"synth-corpus", "--out", mat, "--rows", "50000"}, text) != cli::kExitOk) return Outcome{false, text};
    if (run_cli({"steer-embeddings", mat, (dir / "corpus_labels.csv").string(), "--out", (dir / "steered.efaf").string()},
                text) != cli::kExitOk)
      return Outcome{false, text};
    std::ifstream in(dir / "steered_metrics.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    fs::remove_all(dir);
    const auto c = split(row, ',');
    const double acc0 = std::stod(c[1]), acc1 = std::stod(c[2]), g0 = std::stod(c[3]), g1 = std::stod(c[4]);
    const double cut = 1.0 - g1 / g0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "rms TPR gap %.4f -> %.4f (%.1f%% lower), accuracy %.4f -> %.4f", g0, g1, 100 * cut,
                  acc0, acc1);
    return Outcome{cut >= 0.30 && std::abs(acc1 - acc0) <= 0.03, buf};
  });

  report(9, "reweighing", 0, [] {
    std::mt19937_64 rng(1009);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    double worst_ratio = 0.0, worst_idem = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const int nc = 2 + k % 4, ng = 2 + k % 3;
      Eigen::MatrixXd w(nc, ng);
      for (int i = 0; i < nc; ++i)
        for (int a = 0; a < ng; ++a) w(i, a) = u(rng);
      const auto r = reweigh_kamiran(JointWeights(w / w.sum()));
      worst_ratio = std::max(worst_ratio, weight_ratio_residual(r));
      worst_idem = std::max(worst_idem, reweigh_kamiran(r).max_abs_diff(r));
    }
    Eigen::MatrixXd ex(2, 2);
    ex << 0.3, 0.1, 0.2, 0.4;
    const auto r = reweigh_kamiran(JointWeights(ex));
    const double dev = std::max({std::abs(r(0, 0) - 0.2), std::abs(r(1, 0) - 0.3), std::abs(r(0, 1) - 0.2),
                                 std::abs(r(1, 1) - 0.3)});
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "1000 tables: ratio residual %.1e, idempotence %.1e; (0.3,0.2,0.1,0.4) -> (%.17g, %.17g, %.17g, %.17g)",
                  worst_ratio, worst_idem, r(0, 0), r(1, 0), r(0, 1), r(1, 1));
    return Outcome{worst_ratio <= 1e-12 && worst_idem <= 1e-15 && dev <= 1e-16, buf};
  });

  std::printf("%d failing criteria\n", failures);
  return failures;
}
