#include "fairsteer_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fairsteer/error.hpp"
#include "fairsteer/feature_io.hpp"
#include "fairsteer/ideality.hpp"
#include "fairsteer/moments.hpp"
#include "fairsteer/multiclass_affine.hpp"
#include "fairsteer/spec_io.hpp"
#include "fairsteer/synthetic.hpp"
#include "fairsteer_cli/scenarios.hpp"

namespace fairsteer::cli {

namespace fs = std::filesystem;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("FAIRSTEER_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string v = env;
  if (v == "error" || v == "quiet" || v == "0") return Level::Error;
  if (v == "info" || v == "2") return Level::Info;
  if (v == "debug" || v == "3") return Level::Debug;
  return Level::Warn;
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}
  void warn(const std::string& m) const { emit(Level::Warn, "warning", m); }
  void info(const std::string& m) const { emit(Level::Info, "info", m); }
  void debug(const std::string& m) const { emit(Level::Debug, "debug", m); }

 private:
  void emit(Level l, const char* tag, const std::string& m) const {
    if (static_cast<int>(l) <= static_cast<int>(level_)) err_ << "fairsteer " << tag << ": " << m << "\n";
  }
  std::ostream& err_;
  Level level_;
};

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void print_table(std::ostream& out, const InterventionResult& r) {
  out << "method      " << method_name(r.method) << "\n";
  if (r.gamma_star) out << "gamma*      " << fixed(*r.gamma_star, 9) << "\n";
  out << "KL          " << fixed(r.divergences.kl, 9) << "\n";
  if (r.divergences.js) out << "JS          " << fixed(*r.divergences.js, 9) << "\n";
  out << "pinsker     err <= " << fixed(r.pinsker.err_transfer_prob()) << ", dEO <= " << fixed(r.pinsker.eo_bound_prob())
      << "\n";
  if (r.report_before && r.report_after) {
    out << "            before      after\n";
    out << "BE          " << fixed(r.report_before->bayes_error) << "    " << fixed(r.report_after->bayes_error) << "\n";
    out << "dDP         " << fixed(r.report_before->delta_dp) << "    " << fixed(r.report_after->delta_dp) << "\n";
    out << "dEO         " << fixed(r.report_before->delta_eo) << "    " << fixed(r.report_after->delta_eo) << "\n";
  }
  if (!r.converged) out << "note        optimizer stopped before reaching the gradient tolerance\n";
}

struct Options {
  std::string spec;
  std::string samples;
  std::string matrix;
  std::string labels;
  std::string method = "affirmative";
  std::string out;
  std::string out_dir = "fairsteer_out";
  std::string builtin;
  std::string scenario;
  std::string labels_out;
  double threshold = 0.5;
  bool threshold_set = false;
  double gamma_max = LineSearch{}.gamma_max;
  std::size_t grid = LineSearch{}.grid_points;
  std::uint64_t seed = 0;
  bool reweigh = false;
  bool log_transform = false;
  bool unbiased = false;
  std::size_t rows = CorpusOptions{}.rows;
  double tol = kIdealTol;
};

int cmd_fit(const Options& o, std::ostream& out, const Log& log) {
  const SampleSet s = read_samples_csv(o.samples);
  log.info("read " + std::to_string(s.size()) + " samples");
  const FairDistribution d = fit_from_samples(s, {o.log_transform});
  if (o.out.empty()) {
    out << serialize_distribution(d);
  } else {
    write_distribution(o.out, d);
    out << "wrote " << o.out << "\n";
  }
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  const FairDistribution d = read_distribution(o.spec);
  const auto v = check_ideal(d, o.tol);
  out << v.report();
  return v.is_ideal ? kExitOk : kExitNotIdeal;
}

int cmd_steer(const Options& o, std::ostream& out, const Log& log) {
  FairDistribution d = read_distribution(o.spec);
  if (o.reweigh) {
    d = d.with_weights(reweigh_kamiran(d.weights()));
    log.info("weights reweighed before steering; divergences are relative to the reweighed input");
  }
  const Method m = *parse_method(o.method);
  LineSearch search;
  search.gamma_max = o.gamma_max;
  search.grid_points = o.grid;
  const auto r = run_method(m, d, o.threshold, search);
  if (!r.converged) log.warn("optimizer did not reach the gradient tolerance");
  const fs::path spec_out = o.out.empty() ? fs::path("steered.json") : fs::path(o.out);
  const fs::path diag_out = sibling(spec_out, "_diagnostics.csv");
  write_distribution(spec_out, r.steered);
  write_file_atomic(diag_out, diagnostics_csv_header() + "\n" + diagnostics_csv_row(r) + "\n");
  print_table(out, r);
  out << "wrote " << spec_out.string() << " and " << diag_out.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, const Log& log) {
  std::vector<SimulationScenario> scenarios;
  if (!o.scenario.empty()) scenarios.push_back(parse_scenario(read_text_file(o.scenario)));
  if (o.builtin == "all") {
    for (const auto& n : builtin_scenario_names()) scenarios.push_back(builtin_scenario(n));
  } else if (!o.builtin.empty()) {
    scenarios.push_back(builtin_scenario(o.builtin));
  }
  LineSearch search;
  search.gamma_max = o.gamma_max;
  search.grid_points = o.grid;
  for (auto& s : scenarios) {
    if (o.threshold_set) s.threshold = o.threshold;
    log.info("simulating " + s.name);
    const auto res = run_scenario(s, o.out_dir, search);
    out << s.name << " (t = " << s.threshold << ")\n";
    out << "  method        KL          BE before/after      dDP before/after     dEO before/after\n";
    for (const auto& r : res.results) {
      out << "  " << std::left << std::setw(12) << method_name(r.method) << "  " << fixed(r.divergences.kl) << "    "
          << fixed(r.report_before->bayes_error, 4) << " / " << fixed(r.report_after->bayes_error, 4) << "    "
          << fixed(r.report_before->delta_dp, 4) << " / " << fixed(r.report_after->delta_dp, 4) << "    "
          << fixed(r.report_before->delta_eo, 4) << " / " << fixed(r.report_after->delta_eo, 4) << "\n";
    }
    for (const auto& f : res.files) log.debug("wrote " + f.string());
  }
  out << "outputs in " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_steer_embeddings(const Options& o, std::ostream& out, const Log& log) {
  const Eigen::MatrixXd x = read_feature_matrix(o.matrix);
  const LabelTable t = read_label_csv(o.labels, static_cast<std::size_t>(x.rows()));
  log.info("read " + std::to_string(x.rows()) + " x " + std::to_string(x.cols()) + " features");
  PipelineOptions p;
  p.seed = o.seed;
  p.weights = o.reweigh ? WeightMode::Kamiran : WeightMode::Equal;
  const auto r = evaluate_pipeline(x, t.labels, t.groups, p);

  const fs::path mat_out = o.out.empty() ? fs::path("steered.efaf") : fs::path(o.out);
  const fs::path metrics_out = sibling(mat_out, "_metrics.csv");
  write_feature_matrix(mat_out, r.steered, format_for_path(mat_out));

  std::ostringstream m;
  m.precision(10);
  m << "anchor,accuracy_before,accuracy_after,rms_gap_before,rms_gap_after";
  for (const auto& [y, g] : r.gap_before) m << ",gap_before_" << t.class_names[y];
  for (const auto& [y, g] : r.gap_after) m << ",gap_after_" << t.class_names[y];
  m << "\n" << t.class_names[r.anchor] << ',' << r.accuracy_before << ',' << r.accuracy_after << ',' << r.rms_gap_before
    << ',' << r.rms_gap_after;
  for (const auto& [y, g] : r.gap_before) m << ',' << g;
  for (const auto& [y, g] : r.gap_after) m << ',' << g;
  m << "\n";
  write_file_atomic(metrics_out, m.str());

  out << "anchor class     " << t.class_names[r.anchor] << "\n";
  out << "accuracy         " << fixed(r.accuracy_before, 4) << " -> " << fixed(r.accuracy_after, 4) << "\n";
  out << "rms TPR gap      " << fixed(r.rms_gap_before, 4) << " -> " << fixed(r.rms_gap_after, 4) << "\n";
  for (const auto& [y, g] : r.gap_before) {
    const auto it = r.gap_after.find(y);
    out << "  gap[" << t.class_names[y] << "]  " << fixed(g, 4) << " -> "
        << (it == r.gap_after.end() ? std::string("n/a") : fixed(it->second, 4)) << "\n";
  }
  out << "wrote " << mat_out.string() << " and " << metrics_out.string() << "\n";
  return kExitOk;
}

int cmd_synth_corpus(const Options& o, std::ostream& out) {
  CorpusOptions c;
  c.seed = o.seed;
  c.rows = o.rows;
  c.biased = !o.unbiased;
  const Corpus corpus = synthesize_corpus(c);
  const fs::path mat_out = o.out.empty() ? fs::path("corpus.efaf") : fs::path(o.out);
  const fs::path lab_out = o.labels_out.empty() ? sibling(mat_out, "_labels.csv") : fs::path(o.labels_out);
  write_feature_matrix(mat_out, corpus.features, format_for_path(mat_out));
  write_label_csv(lab_out, corpus.labels, corpus.groups);
  out << "wrote " << mat_out.string() << " and " << lab_out.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair-distribution checks and steering for group/class-conditioned Gaussians", "fairsteer"};
  app.require_subcommand(1);
  Options o;
  const Log log(err);

  auto* fit = app.add_subcommand("fit", "Fit a distribution spec from a samples CSV");
  fit->add_option("samples", o.samples, "CSV with x_0..x_{d-1},class,group")->required();
  fit->add_option("--out", o.out, "Spec output path (stdout if omitted)");
  fit->add_flag("--log-transform", o.log_transform, "Fit log-normal cells via log features");

  auto* check = app.add_subcommand("check", "Check whether a spec is ideal for equal opportunity");
  check->add_option("spec", o.spec, "Distribution spec")->required();
  check->add_option("--tol", o.tol, "Residual tolerance")->check(CLI::PositiveNumber);

  const std::vector<std::string> methods = {"affirmative", "all", "mean-match", "multivariate"};
  auto* steer = app.add_subcommand("steer", "Compute the nearest ideal distribution");
  steer->add_option("spec", o.spec, "Distribution spec")->required();
  steer->add_option("--method", o.method, "affirmative | all | mean-match | multivariate")->check(CLI::IsMember(methods));
  steer->add_option("--threshold", o.threshold, "Classifier threshold in (0,1)")->check(CLI::Range(0.0, 1.0));
  steer->add_option("--gamma-max", o.gamma_max, "Upper end of the gamma search")->check(CLI::PositiveNumber);
  steer->add_option("--grid", o.grid, "Gamma grid points")->check(CLI::Range(3, 10000000));
  steer->add_flag("--reweigh", o.reweigh, "Reweigh q to class/group independence first");
  steer->add_option("--out", o.out, "Steered spec path (diagnostics CSV written alongside)");

  auto* sim = app.add_subcommand("simulate", "Run case-study scenarios and emit CSV + SVG");
  sim->add_option("scenario", o.scenario, "Scenario JSON file");
  sim->add_option("--builtin", o.builtin, "Builtin scenario name or 'all'");
  sim->add_option("--out-dir", o.out_dir, "Output directory");
  sim->add_option("--threshold", o.threshold, "Override the scenario threshold")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--gamma-max", o.gamma_max, "Upper end of the gamma search")->check(CLI::PositiveNumber);
  sim->add_option("--grid", o.grid, "Gamma grid points")->check(CLI::Range(3, 10000000));

  auto* emb = app.add_subcommand("steer-embeddings", "Multi-class affine steering of a feature matrix");
  emb->add_option("matrix", o.matrix, "Feature matrix (EFAF binary or CSV)")->required();
  emb->add_option("labels", o.labels, "CSV with row,label,group")->required();
  emb->add_option("--out", o.out, "Steered matrix path (metrics CSV written alongside)");
  emb->add_flag("--reweigh", o.reweigh, "Use reweighed count weights instead of q_y0 = q_y1");
  emb->add_option("--seed", o.seed, "Split seed");

  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic biased multi-class corpus");
  synth->add_option("--out", o.out, "Matrix path");
  synth->add_option("--labels", o.labels_out, "Labels CSV path");
  synth->add_option("--seed", o.seed, "Generator seed")->default_val(7);
  synth->add_option("--rows", o.rows, "Row count")->check(CLI::Range(10, 100000000));
  synth->add_flag("--unbiased", o.unbiased, "Draw both groups from the same law");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fairsteer: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kExitUsage;
  }
  o.threshold_set = sim->count("--threshold") > 0;
  if (steer->parsed() && !(o.threshold > 0.0 && o.threshold < 1.0)) {
    err << "fairsteer: --threshold must lie strictly between 0 and 1\n";
    return kExitUsage;
  }
  if (sim->parsed() && o.scenario.empty() && o.builtin.empty()) {
    err << "fairsteer: simulate needs a scenario file or --builtin\n";
    return kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(o, out, log);
    if (check->parsed()) return cmd_check(o, out);
    if (steer->parsed()) return cmd_steer(o, out, log);
    if (sim->parsed()) return cmd_simulate(o, out, log);
    if (emb->parsed()) return cmd_steer_embeddings(o, out, log);
    if (synth->parsed()) return cmd_synth_corpus(o, out);
  } catch (const Error& e) {
    err << "fairsteer: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "fairsteer: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}

}  // namespace fairsteer::cli
