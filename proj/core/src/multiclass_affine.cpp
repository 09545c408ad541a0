#include "fairsteer/multiclass_affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fairsteer/bayes.hpp"
#include "fairsteer/distribution.hpp"
#include "fairsteer/error.hpp"
#include "fairsteer/ideality.hpp"
#include "fairsteer/synthetic.hpp"

namespace fairsteer {

namespace {

void check_rows(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                const std::vector<std::size_t>& groups) {
  if (labels.size() != groups.size() || static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "features, labels and groups must have the same number of rows");
  }
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(idx[k]));
  return out;
}

std::vector<std::size_t> take(const std::vector<std::size_t>& v, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (auto k : idx) out.push_back(v[k]);
  return out;
}

double accuracy(const std::vector<std::size_t>& labels, const std::vector<std::size_t>& preds) {
  std::size_t hit = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) hit += labels[k] == preds[k];
  return labels.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(labels.size());
}

// Group-aware diagonal plug-in scorer on target moments; misclassification count.
std::size_t scorer_errors(const ClassGroupMoments& target, const Eigen::MatrixXd& x,
                          const std::vector<std::size_t>& labels, const std::vector<std::size_t>& groups) {
  const std::size_t nc = target.num_classes;
  std::vector<double> bias(nc * target.num_groups);
  for (std::size_t y = 0; y < nc; ++y) {
    for (std::size_t a = 0; a < target.num_groups; ++a) {
      bias[y * target.num_groups + a] = std::log(target.q(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(a))) -
                                        target.at(y, a).std.array().log().sum();
    }
  }
  std::size_t errors = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const std::size_t a = groups[static_cast<std::size_t>(r)];
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < nc; ++y) {
      const auto& c = target.at(y, a);
      const double score =
          bias[y * target.num_groups + a] -
          0.5 * ((x.row(r).transpose() - c.mean).array() / c.std.array()).square().sum();
      if (score > best_score) {
        best_score = score;
        best = y;
      }
    }
    errors += best != labels[static_cast<std::size_t>(r)];
  }
  return errors;
}

}  // namespace

const CellMoments& ClassGroupMoments::at(std::size_t cls, std::size_t group) const {
  if (cls >= num_classes || group >= num_groups) throw Error(ErrorCode::MissingCell, "no moments for cell");
  return cells[cls * num_groups + group];
}

CellMoments& ClassGroupMoments::at(std::size_t cls, std::size_t group) {
  if (cls >= num_classes || group >= num_groups) throw Error(ErrorCode::MissingCell, "no moments for cell");
  return cells[cls * num_groups + group];
}

const AffineCell& AffineMap::at(std::size_t cls, std::size_t group) const {
  if (cls >= num_classes || group >= num_groups) {
    throw Error(ErrorCode::MissingCell, "no affine map for cell (" + std::to_string(cls) + "," + std::to_string(group) + ")");
  }
  return cells[cls * num_groups + group];
}

ClassGroupMoments fit_moments(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                              const std::vector<std::size_t>& groups, std::size_t num_classes, std::size_t num_groups) {
  check_rows(features, labels, groups);
  const Eigen::Index d = features.cols();
  ClassGroupMoments m;
  m.num_classes = num_classes;
  m.num_groups = num_groups;
  m.dim = static_cast<std::size_t>(d);
  m.cells.assign(num_classes * num_groups, CellMoments{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), 0});
  std::vector<Eigen::VectorXd> sq(m.cells.size(), Eigen::VectorXd::Zero(d));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] >= num_classes || groups[r] >= num_groups) throw Error(ErrorCode::MissingCell, "label out of range");
    auto& c = m.cells[labels[r] * num_groups + groups[r]];
    c.mean += features.row(static_cast<Eigen::Index>(r)).transpose();
    ++c.count;
  }
  for (auto& c : m.cells) {
    if (c.count >= 1) c.mean /= static_cast<double>(c.count);
  }
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const std::size_t k = labels[r] * num_groups + groups[r];
    sq[k] += (features.row(static_cast<Eigen::Index>(r)).transpose() - m.cells[k].mean).array().square().matrix();
  }
  m.q.resize(static_cast<Eigen::Index>(num_classes), static_cast<Eigen::Index>(num_groups));
  for (std::size_t y = 0; y < num_classes; ++y) {
    for (std::size_t a = 0; a < num_groups; ++a) {
      const std::size_t k = y * num_groups + a;
      auto& c = m.cells[k];
      if (c.count < 2) {
        throw Error(ErrorCode::EmptyCell, "cell (" + std::to_string(y) + "," + std::to_string(a) + ") has " +
                                              std::to_string(c.count) + " row(s), need at least 2");
      }
      c.std = (sq[k] / static_cast<double>(c.count - 1)).array().sqrt().max(kEpsStd).matrix();
      m.q(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(a)) =
          static_cast<double>(c.count) / static_cast<double>(labels.size());
    }
  }
  return m;
}

std::size_t pick_anchor_class(const std::vector<std::size_t>& labels, const std::vector<std::size_t>& groups,
                              const std::vector<std::size_t>& preds) {
  const TprGaps gaps = tpr_gap_multiclass(labels, groups, preds);
  if (!gaps.omitted.empty() || gaps.gap.empty()) {
    throw Error(ErrorCode::EmptyCell, "every class needs rows in every group to pick an anchor");
  }
  std::size_t best = gaps.gap.begin()->first;
  for (const auto& [y, g] : gaps.gap) {
    if (g < gaps.gap.at(best)) best = y;
  }
  return best;
}

ClassGroupMoments ef_affirmative_targets(const ClassGroupMoments& moments, std::size_t anchor, WeightMode mode) {
  if (moments.num_groups != 2) throw Error(ErrorCode::InvalidArgument, "targets need exactly two groups");
  if (anchor >= moments.num_classes) throw Error(ErrorCode::MissingCell, "anchor class out of range");
  Eigen::MatrixXd q = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(moments.num_classes), 2);
  if (mode == WeightMode::Kamiran) q = reweigh_kamiran(JointWeights::normalized(moments.q)).table();

  const auto& s0 = moments.at(anchor, 0);
  const auto& s1 = moments.at(anchor, 1);
  if ((s0.std.array() < kEpsStd).any() || (s1.std.array() < kEpsStd).any()) {
    throw Error(ErrorCode::DegenerateStd, "anchor class std below floor");
  }
  const Eigen::ArrayXd gamma = s1.std.array() / s0.std.array();
  const Eigen::ArrayXd g2 = gamma.square();

  ClassGroupMoments t = moments;
  for (std::size_t y = 0; y < moments.num_classes; ++y) {
    const auto& c0 = moments.at(y, 0);
    const auto& c1 = moments.at(y, 1);
    const double q0 = q(static_cast<Eigen::Index>(y), 0);
    const double q1 = q(static_cast<Eigen::Index>(y), 1);
    const Eigen::ArrayXd w0 = q0 / c0.std.array().square();
    const Eigen::ArrayXd w1 = q1 / c1.std.array().square();
    const Eigen::ArrayXd den = w0 + g2 * w1;

    t.at(y, 0).std = ((q0 + q1) / den).sqrt().matrix();
    t.at(y, 1).std = (gamma * t.at(y, 0).std.array()).matrix();
    t.at(y, 0).mean =
        ((w0 * c0.mean.array() + gamma * w1 * (c1.mean.array() - s1.mean.array() + gamma * s0.mean.array())) / den)
            .matrix();
    t.at(y, 1).mean =
        ((w0 * (s1.mean.array() - gamma * s0.mean.array() + gamma * c0.mean.array()) + g2 * w1 * c1.mean.array()) /
         den)
            .matrix();
  }
  return t;
}

AffineMap affine_from_moments(const ClassGroupMoments& orig, const ClassGroupMoments& target,
                              const std::vector<int>& signs) {
  if (orig.num_classes != target.num_classes || orig.num_groups != target.num_groups || orig.dim != target.dim) {
    throw Error(ErrorCode::DimensionMismatch, "original and target moments have different shapes");
  }
  if (!signs.empty() && signs.size() != orig.cells.size()) throw Error(ErrorCode::DimensionMismatch, "one sign per cell");
  AffineMap map;
  map.num_classes = orig.num_classes;
  map.num_groups = orig.num_groups;
  for (std::size_t k = 0; k < orig.cells.size(); ++k) {
    const double s = signs.empty() ? 1.0 : static_cast<double>(signs[k]);
    const auto& o = orig.cells[k];
    const auto& t = target.cells[k];
    if (o.mean.size() != t.mean.size()) throw Error(ErrorCode::DimensionMismatch, "cell dimensions differ");
    AffineCell c;
    c.scale = (s * t.std.array() / o.std.array()).matrix();
    c.offset = (t.mean.array() - c.scale.array() * o.mean.array()).matrix();
    map.cells.push_back(std::move(c));
  }
  return map;
}

AffineMap fit_affine(const ClassGroupMoments& orig, const ClassGroupMoments& target, const LabeledFeatures* validation) {
  std::vector<int> signs(orig.cells.size(), 1);
  AffineMap best = affine_from_moments(orig, target, signs);
  if (validation == nullptr) return best;
  if (static_cast<std::size_t>(validation->features.cols()) != orig.dim) {
    throw Error(ErrorCode::DimensionMismatch, "validation features have the wrong width");
  }
  const auto errors_of = [&](const AffineMap& m) {
    const Eigen::MatrixXd x = apply_affine(m, validation->features, validation->labels, validation->groups);
    return scorer_errors(target, x, validation->labels, validation->groups);
  };
  std::size_t best_err = errors_of(best);
  for (std::size_t k = 0; k < signs.size(); ++k) {
    signs[k] = -1;
    AffineMap cand = affine_from_moments(orig, target, signs);
    const std::size_t err = errors_of(cand);
    if (err < best_err) {
      best_err = err;
      best = std::move(cand);
    } else {
      signs[k] = 1;
    }
  }
  return best;
}

Eigen::MatrixXd apply_affine(const AffineMap& map, const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                             const std::vector<std::size_t>& groups) {
  check_rows(features, labels, groups);
  Eigen::MatrixXd out(features.rows(), features.cols());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto& c = map.at(labels[r], groups[r]);
    if (c.scale.size() != features.cols()) throw Error(ErrorCode::DimensionMismatch, "map width differs from features");
    const auto row = static_cast<Eigen::Index>(r);
    out.row(row) = (c.scale.array() * features.row(row).transpose().array() + c.offset.array()).transpose();
  }
  return out;
}

PlugInClassifier PlugInClassifier::fit(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                                       std::size_t num_classes) {
  const std::vector<std::size_t> one_group(labels.size(), 0);
  const ClassGroupMoments m = fit_moments(features, labels, one_group, num_classes, 1);
  PlugInClassifier c;
  const auto k = static_cast<Eigen::Index>(num_classes);
  const auto d = features.cols();
  c.mean.resize(k, d);
  c.log_std.resize(k, d);
  c.inv_std.resize(k, d);
  c.log_prior.resize(k);
  for (std::size_t y = 0; y < num_classes; ++y) {
    const auto& cell = m.at(y, 0);
    const auto row = static_cast<Eigen::Index>(y);
    c.mean.row(row) = cell.mean.transpose();
    c.log_std.row(row) = cell.std.array().log().matrix().transpose();
    c.inv_std.row(row) = cell.std.array().inverse().matrix().transpose();
    c.log_prior(row) = std::log(m.q(row, 0));
  }
  return c;
}

std::vector<std::size_t> PlugInClassifier::predict(const Eigen::MatrixXd& features) const {
  const Eigen::VectorXd bias = log_prior - log_std.rowwise().sum();
  std::vector<std::size_t> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    Eigen::Index best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index y = 0; y < mean.rows(); ++y) {
      const double score =
          bias(y) - 0.5 * ((features.row(r) - mean.row(y)).array() * inv_std.row(y).array()).square().sum();
      if (score > best_score) {
        best_score = score;
        best = y;
      }
    }
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  NormalStream rs(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rs.index(i)]);
  return p;
}

double rms(const std::map<std::size_t, double>& gaps) {
  if (gaps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [y, g] : gaps) s += g * g;
  return std::sqrt(s / static_cast<double>(gaps.size()));
}

PipelineResult evaluate_pipeline(const Eigen::MatrixXd& features, const std::vector<std::size_t>& labels,
                                 const std::vector<std::size_t>& groups, const PipelineOptions& options) {
  check_rows(features, labels, groups);
  const auto& sp = options.split;
  if (!(sp.train > 0.0 && sp.validation > 0.0 && sp.test > 0.0) ||
      std::abs(sp.train + sp.validation + sp.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must be positive and sum to 1");
  }
  const std::size_t n = labels.size();
  if (n == 0) throw Error(ErrorCode::EmptyCell, "no rows");
  const std::size_t nc = *std::max_element(labels.begin(), labels.end()) + 1;
  const std::size_t ng = *std::max_element(groups.begin(), groups.end()) + 1;
  if (ng != 2) throw Error(ErrorCode::InvalidArgument, "steering needs exactly two groups");

  const auto perm = seeded_permutation(n, options.seed);
  const auto n_train = static_cast<std::size_t>(sp.train * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(sp.validation * static_cast<double>(n));
  std::vector<std::size_t> tr(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> va(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                              perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  std::vector<std::size_t> te(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  // Keep subsets in row order so results do not depend on the permutation beyond membership.
  std::sort(tr.begin(), tr.end());
  std::sort(va.begin(), va.end());
  std::sort(te.begin(), te.end());

  const Eigen::MatrixXd x_tr = take_rows(features, tr), x_va = take_rows(features, va), x_te = take_rows(features, te);
  const auto y_tr = take(labels, tr), y_va = take(labels, va), y_te = take(labels, te);
  const auto a_tr = take(groups, tr), a_va = take(groups, va), a_te = take(groups, te);

  PipelineResult r;
  const auto base = PlugInClassifier::fit(x_tr, y_tr, nc);
  const auto pred_te = base.predict(x_te);
  r.accuracy_before = accuracy(y_te, pred_te);
  r.gap_before = tpr_gap_multiclass(y_te, a_te, pred_te).gap;
  r.anchor = pick_anchor_class(y_va, a_va, base.predict(x_va));

  const ClassGroupMoments orig = fit_moments(x_tr, y_tr, a_tr, nc, ng);
  const ClassGroupMoments target = ef_affirmative_targets(orig, r.anchor, options.weights);
  const LabeledFeatures val{x_va, y_va, a_va};
  r.map = fit_affine(orig, target, &val);
  r.steered = apply_affine(r.map, features, labels, groups);

  const auto steered_model = PlugInClassifier::fit(take_rows(r.steered, tr), y_tr, nc);
  const auto pred_after = steered_model.predict(take_rows(r.steered, te));
  r.accuracy_after = accuracy(y_te, pred_after);
  r.gap_after = tpr_gap_multiclass(y_te, a_te, pred_after).gap;
  r.rms_gap_before = rms(r.gap_before);
  r.rms_gap_after = rms(r.gap_after);
  return r;
}

}  // namespace fairsteer
