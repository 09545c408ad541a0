#include "fairsteer/moments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "fairsteer/error.hpp"
#include "fairsteer/linalg.hpp"

namespace fairsteer {

namespace {

std::optional<double> as_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

std::vector<std::string> ordered_labels(const std::vector<std::string>& labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  const bool numeric = std::all_of(out.begin(), out.end(), [](const std::string& s) { return as_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(out.begin(), out.end(),
                     [](const std::string& a, const std::string& b) { return *as_number(a) < *as_number(b); });
  }
  return out;
}

FairDistribution fit_from_samples(const SampleSet& rows, const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (rows.groups.size() != rows.classes.size() || rows.features.rows() != n) {
    throw Error(ErrorCode::LengthMismatch, "features, classes and groups must have the same number of rows");
  }
  if (n == 0 || rows.features.cols() == 0) throw Error(ErrorCode::EmptyCell, "no samples");

  Eigen::MatrixXd x = rows.features;
  if (options.log_transform) {
    if (!((x.array() > 0.0).all())) throw Error(ErrorCode::NonPositiveFeature, "log transform needs positive features");
    x = x.array().log().matrix();
  }

  const auto classes = ordered_labels(rows.classes);
  const auto groups = ordered_labels(rows.groups);
  std::map<std::string, std::size_t> ci, gi;
  for (std::size_t i = 0; i < classes.size(); ++i) ci[classes[i]] = i;
  for (std::size_t a = 0; a < groups.size(); ++a) gi[groups[a]] = a;

  const std::size_t cells = classes.size() * groups.size();
  std::vector<std::vector<Eigen::Index>> members(cells);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto k = static_cast<std::size_t>(r);
    members[ci[rows.classes[k]] * groups.size() + gi[rows.groups[k]]].push_back(r);
  }

  const Eigen::Index d = x.cols();
  Eigen::MatrixXd q(static_cast<Eigen::Index>(classes.size()), static_cast<Eigen::Index>(groups.size()));
  std::vector<SubgroupGaussian> subs;
  subs.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& idx = members[c];
    const std::size_t i = c / groups.size();
    const std::size_t a = c % groups.size();
    if (idx.size() < 2) {
      throw Error(ErrorCode::EmptyCell, "cell (" + classes[i] + "," + groups[a] + ") has " +
                                            std::to_string(idx.size()) + " sample(s), need at least 2");
    }
    const auto m = static_cast<double>(idx.size());
    q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = m / static_cast<double>(n);
    Eigen::MatrixXd block(static_cast<Eigen::Index>(idx.size()), d);
    for (std::size_t k = 0; k < idx.size(); ++k) block.row(static_cast<Eigen::Index>(k)) = x.row(idx[k]);
    const Eigen::VectorXd mean = block.colwise().mean().transpose();
    const Eigen::MatrixXd centered = block.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / (m - 1.0);
    if (d == 1) {
      subs.emplace_back(mean(0), std::max(std::sqrt(cov(0, 0)), kEpsStd));
    } else {
      subs.emplace_back(mean, linalg::clip_eigenvalues(cov, 2.0 * kEpsPd));
    }
  }
  return FairDistribution(JointWeights::normalized(q), std::move(subs), classes, groups);
}

}  // namespace fairsteer
