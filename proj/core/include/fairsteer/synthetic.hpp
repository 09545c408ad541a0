#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace fairsteer {

/// Portable normal draws from a mt19937_64 stream (Box-Muller).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}

  double uniform();  // (0, 1)
  double normal();
  std::uint64_t bits() { return rng_(); }
  std::size_t index(std::size_t n);  // uniform on [0, n)

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct CorpusOptions {
  std::size_t rows = 50000;
  std::size_t dim = 16;
  std::size_t classes = 5;
  double class_spread = 0.5;
  double shift_scale = 0.3;
  double compression_lo = 0.8;
  double compression_hi = 1.0;
  bool biased = true;  // false draws both groups from the same law
  std::uint64_t seed = 7;
};

struct Corpus {
  Eigen::MatrixXd features;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> groups;
};

/// Class c, group 1: N(base_c, I). Group 0: base_c + shift_c plus noise
/// scaled by compression_c. Class 0 is left unbiased.
[[nodiscard]] Corpus synthesize_corpus(const CorpusOptions& options = {});

}  // namespace fairsteer
