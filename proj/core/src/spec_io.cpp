#include "fairsteer/spec_io.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "fairsteer/error.hpp"

namespace fairsteer {

using nlohmann::json;

namespace {

std::string cell_key(const std::string& cls, const std::string& group) { return cls + "," + group; }

std::vector<std::string> name_list(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array() || j[field].empty()) {
    throw Error(ErrorCode::ParseError, std::string("missing or empty '") + field + "' array");
  }
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& v : j[field]) {
    std::string s;
    if (v.is_string()) {
      s = v.get<std::string>();
    } else if (v.is_number_integer()) {
      s = std::to_string(v.get<long long>());
    } else {
      throw Error(ErrorCode::ParseError, std::string("'") + field + "' entries must be strings or integers");
    }
    if (!seen.insert(s).second) throw Error(ErrorCode::ParseError, "duplicate label '" + s + "'");
    names.push_back(s);
  }
  return names;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, what + " must be a number");
  return j.get<double>();
}

SubgroupGaussian parse_subgroup(const json& j, const std::string& key) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "subgroup '" + key + "' must be an object");
  if (j.contains("mean_vec")) {
    const auto& mv = j["mean_vec"];
    if (!mv.is_array() || mv.empty()) throw Error(ErrorCode::ParseError, "subgroup '" + key + "': bad mean_vec");
    const auto d = static_cast<Eigen::Index>(mv.size());
    Eigen::VectorXd mean(d);
    for (Eigen::Index k = 0; k < d; ++k) mean(k) = number(mv[static_cast<std::size_t>(k)], "mean_vec entry");
    if (!j.contains("cov") || !j["cov"].is_array()) throw Error(ErrorCode::ParseError, "subgroup '" + key + "': missing cov");
    std::vector<double> flat;
    for (const auto& v : j["cov"]) {
      if (v.is_array()) {
        for (const auto& w : v) flat.push_back(number(w, "cov entry"));
      } else {
        flat.push_back(number(v, "cov entry"));
      }
    }
    if (flat.size() != static_cast<std::size_t>(d * d)) {
      throw Error(ErrorCode::ParseError, "subgroup '" + key + "': cov must have d*d entries");
    }
    Eigen::MatrixXd cov(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) cov(r, c) = flat[static_cast<std::size_t>(r * d + c)];
    return SubgroupGaussian(mean, cov);
  }
  if (!j.contains("mean") || !j.contains("std")) {
    throw Error(ErrorCode::ParseError, "subgroup '" + key + "' needs mean/std or mean_vec/cov");
  }
  return SubgroupGaussian(number(j["mean"], "mean"), number(j["std"], "std"));
}

}  // namespace

FairDistribution parse_distribution(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "spec must be a JSON object");
  const auto classes = name_list(j, "classes");
  const auto groups = name_list(j, "groups");
  if (!j.contains("q") || !j["q"].is_object()) throw Error(ErrorCode::ParseError, "missing 'q' object");
  if (!j.contains("subgroups") || !j["subgroups"].is_object()) {
    throw Error(ErrorCode::ParseError, "missing 'subgroups' object");
  }
  const auto& jq = j["q"];
  const auto& js = j["subgroups"];
  const std::size_t cells = classes.size() * groups.size();
  if (jq.size() != cells || js.size() != cells) {
    throw Error(ErrorCode::KeyMismatch, "q and subgroups must each have one entry per (class, group)");
  }

  Eigen::MatrixXd q(static_cast<Eigen::Index>(classes.size()), static_cast<Eigen::Index>(groups.size()));
  std::vector<SubgroupGaussian> subs;
  subs.reserve(cells);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t a = 0; a < groups.size(); ++a) {
      const auto key = cell_key(classes[i], groups[a]);
      if (!jq.contains(key)) throw Error(ErrorCode::KeyMismatch, "q has no entry '" + key + "'");
      if (!js.contains(key)) throw Error(ErrorCode::KeyMismatch, "subgroups has no entry '" + key + "'");
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = number(jq[key], "q['" + key + "']");
      subs.push_back(parse_subgroup(js[key], key));
    }
  }
  return FairDistribution(JointWeights(q), std::move(subs), classes, groups);
}

std::string serialize_distribution(const FairDistribution& dist) {
  json j;
  j["classes"] = dist.class_names();
  j["groups"] = dist.group_names();
  json jq = json::object();
  json js = json::object();
  for (std::size_t i = 0; i < dist.num_classes(); ++i) {
    for (std::size_t a = 0; a < dist.num_groups(); ++a) {
      const auto key = cell_key(dist.class_names()[i], dist.group_names()[a]);
      jq[key] = dist.q(i, a);
      const auto& g = dist.subgroup(i, a);
      if (g.is_univariate()) {
        js[key] = {{"mean", g.mean()}, {"std", g.stddev()}};
      } else {
        std::vector<double> mv(g.mean_vec().data(), g.mean_vec().data() + g.mean_vec().size());
        std::vector<double> cov;
        for (Eigen::Index r = 0; r < g.cov().rows(); ++r)
          for (Eigen::Index c = 0; c < g.cov().cols(); ++c) cov.push_back(g.cov()(r, c));
        js[key] = {{"mean_vec", mv}, {"cov", cov}};
      }
    }
  }
  j["q"] = jq;
  j["subgroups"] = js;
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

FairDistribution read_distribution(const std::filesystem::path& path) { return parse_distribution(read_text_file(path)); }

void write_distribution(const std::filesystem::path& path, const FairDistribution& dist) {
  write_file_atomic(path, serialize_distribution(dist));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

SampleSet parse_samples_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty samples CSV");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[header.size() - 2] != "class" || header.back() != "group") {
    throw Error(ErrorCode::ParseError, "samples CSV header must be x_0,...,x_{d-1},class,group");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k) {
    if (header[k] != "x_" + std::to_string(k)) throw Error(ErrorCode::ParseError, "unexpected column '" + header[k] + "'");
  }
  std::vector<double> values;
  SampleSet s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != d + 2) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": wrong column count");
    for (std::size_t k = 0; k < d; ++k) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cols[k], &used));
        if (used != cols[k].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number '" + cols[k] + "'");
      }
    }
    s.classes.push_back(cols[d]);
    s.groups.push_back(cols[d + 1]);
  }
  const auto n = static_cast<Eigen::Index>(s.classes.size());
  s.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, static_cast<Eigen::Index>(d));
  return s;
}

SampleSet read_samples_csv(const std::filesystem::path& path) { return parse_samples_csv(read_text_file(path)); }

void write_samples_csv(const std::filesystem::path& path, const SampleSet& samples) {
  std::ostringstream out;
  out.precision(17);
  const auto d = samples.features.cols();
  for (Eigen::Index k = 0; k < d; ++k) out << "x_" << k << ',';
  out << "class,group\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (Eigen::Index k = 0; k < d; ++k) out << samples.features(static_cast<Eigen::Index>(r), k) << ',';
    out << samples.classes[r] << ',' << samples.groups[r] << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace fairsteer
