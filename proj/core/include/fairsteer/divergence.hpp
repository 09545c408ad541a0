#pragma once

#include <optional>

#include "fairsteer/distribution.hpp"

namespace fairsteer {

/// Divergences in nats. js is only available for univariate distributions.
struct DivergenceReport {
  double kl = 0.0;
  std::optional<double> js;
};

/// KL(p_new || p_orig) between two Gaussians of equal dimension.
[[nodiscard]] double kl_gaussian(const SubgroupGaussian& p_new, const SubgroupGaussian& p_orig);

/// Sum over cells of q_ia KL(new_ia || orig_ia); requires identical weights.
[[nodiscard]] double kl_divergence(const FairDistribution& dist_new, const FairDistribution& dist_orig);

/// Jensen-Shannon divergence of two univariate Gaussians by adaptive quadrature.
[[nodiscard]] double js_gaussian(const SubgroupGaussian& a, const SubgroupGaussian& b);

/// Jensen-Shannon divergence of the joint densities p(x, i, a).
[[nodiscard]] double js_divergence(const FairDistribution& dist_a, const FairDistribution& dist_b);

/// KL always, JS when both arguments are univariate.
[[nodiscard]] DivergenceReport divergence_report(const FairDistribution& dist_new, const FairDistribution& dist_orig);

}  // namespace fairsteer
