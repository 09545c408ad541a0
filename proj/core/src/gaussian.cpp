#include "fairsteer/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace fairsteer {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_pdf(double z) noexcept { return std::exp(-0.5 * z * z) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2); }

double gaussian_cdf(double x, const SubgroupGaussian& g) { return normal_cdf((x - g.mean()) / g.stddev()); }

double gaussian_pdf(double x, const SubgroupGaussian& g) {
  const double s = g.stddev();
  return normal_pdf((x - g.mean()) / s) / s;
}

double gaussian_logpdf(double x, const SubgroupGaussian& g) {
  const double s = g.stddev();
  const double z = (x - g.mean()) / s;
  return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double interval_mass(double lo, double hi, const SubgroupGaussian& g) {
  if (!(hi > lo)) return 0.0;
  const double m = g.mean();
  const double s = g.stddev();
  const double zl = (lo - m) / s;
  const double zh = (hi - m) / s;
  // Difference the tail that keeps both terms small.
  if (zl > 0.0) return normal_sf(zl) - normal_sf(zh);
  if (zh < 0.0) return normal_cdf(zh) - normal_cdf(zl);
  return 1.0 - normal_cdf(zl) - normal_sf(zh);
}

}  // namespace fairsteer
