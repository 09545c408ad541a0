#pragma once

#include "fairsteer/distribution.hpp"

namespace fairsteer {

// Standard normal primitives.
[[nodiscard]] double normal_cdf(double z) noexcept;
[[nodiscard]] double normal_sf(double z) noexcept;  // 1 - cdf, accurate in the upper tail
[[nodiscard]] double normal_pdf(double z) noexcept;

// Univariate subgroup; throws InvalidArgument for dim() != 1.
[[nodiscard]] double gaussian_cdf(double x, const SubgroupGaussian& g);
[[nodiscard]] double gaussian_pdf(double x, const SubgroupGaussian& g);
[[nodiscard]] double gaussian_logpdf(double x, const SubgroupGaussian& g);

/// P(lo < X < hi) for X ~ g. Either end may be infinite.
[[nodiscard]] double interval_mass(double lo, double hi, const SubgroupGaussian& g);

}  // namespace fairsteer
