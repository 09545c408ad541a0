#include "fairsteer/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace fairsteer {

double NormalStream::uniform() {
  // 53 random bits mapped into the open unit interval.
  return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double th = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(th);
  has_spare_ = true;
  return r * std::cos(th);
}

std::size_t NormalStream::index(std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng_();
  while (x >= limit) x = rng_();
  return static_cast<std::size_t>(x % bound);
}

Corpus synthesize_corpus(const CorpusOptions& o) {
  NormalStream rs(o.seed);
  const auto k = static_cast<Eigen::Index>(o.classes);
  const auto d = static_cast<Eigen::Index>(o.dim);
  Eigen::MatrixXd base(k, d), shift(k, d);
  Eigen::VectorXd comp(k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < d; ++j) base(c, j) = o.class_spread * rs.normal();
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < d; ++j) shift(c, j) = o.shift_scale * rs.normal();
  for (Eigen::Index c = 0; c < k; ++c) comp(c) = o.compression_lo + (o.compression_hi - o.compression_lo) * rs.uniform();
  shift.row(0).setZero();
  comp(0) = 1.0;
  if (!o.biased) {
    shift.setZero();
    comp.setOnes();
  }

  Corpus out;
  out.features.resize(static_cast<Eigen::Index>(o.rows), d);
  out.labels.resize(o.rows);
  out.groups.resize(o.rows);
  for (std::size_t r = 0; r < o.rows; ++r) {
    const std::size_t y = rs.index(o.classes);
    const std::size_t a = rs.index(2);
    out.labels[r] = y;
    out.groups[r] = a;
    const auto c = static_cast<Eigen::Index>(y);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double z = rs.normal();
      out.features(static_cast<Eigen::Index>(r), j) =
          a == 1 ? base(c, j) + z : base(c, j) + shift(c, j) + comp(c) * z;
    }
  }
  return out;
}

}  // namespace fairsteer
