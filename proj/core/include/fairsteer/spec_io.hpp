#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fairsteer/distribution.hpp"
#include "fairsteer/moments.hpp"

namespace fairsteer {

// Distribution spec documents (JSON):
//   {"classes": [...], "groups": [...], "q": {"i,a": p, ...},
//    "subgroups": {"i,a": {"mean": m, "std": s} | {"mean_vec": [...], "cov": [...]}, ...}}
// cov is row-major, flat (d*d numbers) or nested rows.
[[nodiscard]] FairDistribution parse_distribution(std::string_view text);
[[nodiscard]] std::string serialize_distribution(const FairDistribution& dist);

[[nodiscard]] FairDistribution read_distribution(const std::filesystem::path& path);
void write_distribution(const std::filesystem::path& path, const FairDistribution& dist);

/// CSV with header x_0,...,x_{d-1},class,group.
[[nodiscard]] SampleSet parse_samples_csv(std::string_view text);
[[nodiscard]] SampleSet read_samples_csv(const std::filesystem::path& path);
void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace fairsteer
