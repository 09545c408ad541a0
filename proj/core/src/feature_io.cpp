#include "fairsteer/feature_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <sstream>

#include "fairsteer/error.hpp"
#include "fairsteer/moments.hpp"
#include "fairsteer/spec_io.hpp"

namespace fairsteer {

namespace {

constexpr char kMagic[4] = {'E', 'F', 'A', 'F'};

std::uint32_t read_u32(const std::string& buf, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(buf[at + static_cast<std::size_t>(k)]);
  return v;
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

Eigen::MatrixXd parse_binary(const std::string& buf) {
  if (buf.size() < 12) throw Error(ErrorCode::ParseError, "feature file header truncated");
  const std::uint32_t n = read_u32(buf, 4);
  const std::uint32_t d = read_u32(buf, 8);
  const std::size_t need = 12 + static_cast<std::size_t>(n) * d * 4;
  if (buf.size() != need) throw Error(ErrorCode::ParseError, "feature file size does not match its header");
  Eigen::MatrixXd m(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const std::uint32_t bits = read_u32(buf, 12 + 4 * (r * d + c));
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::bit_cast<float>(bits);
    }
  }
  return m;
}

Eigen::MatrixXd parse_csv(const std::string& buf) {
  std::istringstream in(buf);
  std::string line;
  std::vector<double> values;
  std::size_t width = 0, rows = 0, lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(ErrorCode::ParseError, "feature CSV line " + std::to_string(lineno) + " is not numeric");
    }
    first = false;
    if (rows == 0) width = row.size();
    if (row.size() != width) throw Error(ErrorCode::ParseError, "feature CSV line " + std::to_string(lineno) + " has the wrong width");
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::ParseError, "feature CSV has no rows");
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
}

}  // namespace

FeatureFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FeatureFormat::Csv : FeatureFormat::Binary;
}

Eigen::MatrixXd read_feature_matrix(const std::filesystem::path& path) {
  const std::string buf = read_text_file(path);
  if (buf.size() >= 4 && std::memcmp(buf.data(), kMagic, 4) == 0) return parse_binary(buf);
  return parse_csv(buf);
}

void write_feature_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& features, FeatureFormat format) {
  std::string buf;
  if (format == FeatureFormat::Binary) {
    buf.append(kMagic, 4);
    put_u32(buf, static_cast<std::uint32_t>(features.rows()));
    put_u32(buf, static_cast<std::uint32_t>(features.cols()));
    buf.reserve(12 + static_cast<std::size_t>(features.size()) * 4);
    for (Eigen::Index r = 0; r < features.rows(); ++r)
      for (Eigen::Index c = 0; c < features.cols(); ++c)
        put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(features(r, c))));
  } else {
    std::ostringstream out;
    out.precision(9);
    for (Eigen::Index c = 0; c < features.cols(); ++c) out << (c ? "," : "") << "x_" << c;
    out << '\n';
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      for (Eigen::Index c = 0; c < features.cols(); ++c) out << (c ? "," : "") << features(r, c);
      out << '\n';
    }
    buf = out.str();
  }
  write_file_atomic(path, buf);
}

LabelTable read_label_csv(const std::filesystem::path& path, std::size_t rows) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || split(line) != std::vector<std::string>{"row", "label", "group"}) {
    throw Error(ErrorCode::ParseError, "label CSV header must be row,label,group");
  }
  std::vector<std::string> cls(rows), grp(rows);
  std::vector<bool> seen(rows, false);
  std::size_t lineno = 1, count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    double idx = 0.0;
    if (cells.size() != 3 || !parse_double(cells[0], idx) || idx < 0 || idx != static_cast<double>(static_cast<std::size_t>(idx))) {
      throw Error(ErrorCode::ParseError, "label CSV line " + std::to_string(lineno) + " is malformed");
    }
    const auto r = static_cast<std::size_t>(idx);
    if (r >= rows || seen[r]) throw Error(ErrorCode::ParseError, "label CSV row index " + cells[0] + " out of range or repeated");
    seen[r] = true;
    cls[r] = cells[1];
    grp[r] = cells[2];
    ++count;
  }
  if (count != rows) {
    throw Error(ErrorCode::LengthMismatch, "label CSV covers " + std::to_string(count) + " of " + std::to_string(rows) + " rows");
  }
  LabelTable t;
  t.class_names = ordered_labels(cls);
  t.group_names = ordered_labels(grp);
  std::map<std::string, std::size_t> ci, gi;
  for (std::size_t k = 0; k < t.class_names.size(); ++k) ci[t.class_names[k]] = k;
  for (std::size_t k = 0; k < t.group_names.size(); ++k) gi[t.group_names[k]] = k;
  for (std::size_t r = 0; r < rows; ++r) {
    t.labels.push_back(ci[cls[r]]);
    t.groups.push_back(gi[grp[r]]);
  }
  return t;
}

void write_label_csv(const std::filesystem::path& path, const std::vector<std::size_t>& labels,
                     const std::vector<std::size_t>& groups) {
  if (labels.size() != groups.size()) throw Error(ErrorCode::LengthMismatch, "labels and groups differ in length");
  std::ostringstream out;
  out << "row,label,group\n";
  for (std::size_t r = 0; r < labels.size(); ++r) out << r << ',' << labels[r] << ',' << groups[r] << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace fairsteer
