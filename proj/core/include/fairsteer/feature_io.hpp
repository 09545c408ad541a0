#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fairsteer {

// Binary layout: "EFAF", u32 n, u32 d (little endian), then n*d float32 row-major.
enum class FeatureFormat { Binary, Csv };

[[nodiscard]] FeatureFormat format_for_path(const std::filesystem::path& path);  // .csv -> Csv

/// Reads either format, telling them apart by the magic bytes.
[[nodiscard]] Eigen::MatrixXd read_feature_matrix(const std::filesystem::path& path);
void write_feature_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& features, FeatureFormat format);

struct LabelTable {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> groups;
  std::vector<std::string> class_names;
  std::vector<std::string> group_names;
};

/// CSV with header row,label,group; every row index in [0, rows) exactly once.
[[nodiscard]] LabelTable read_label_csv(const std::filesystem::path& path, std::size_t rows);
void write_label_csv(const std::filesystem::path& path, const std::vector<std::size_t>& labels,
                     const std::vector<std::size_t>& groups);

}  // namespace fairsteer
