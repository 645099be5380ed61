#ifndef MDOOD_TESTS_HELPERS_HPP
#define MDOOD_TESTS_HELPERS_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "mdood/embedding_io.hpp"

namespace testing {

inline Eigen::MatrixXd random_normal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
  return m;
}

/// Well-conditioned SPD matrix.
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index d) {
  const Eigen::MatrixXd b = random_normal(rng, d, d);
  Eigen::MatrixXd a = b * b.transpose() / static_cast<double>(d);
  a.diagonal().array() += 0.5;
  return 0.5 * (a + a.transpose());
}

/// An embedding set filled with standard normals, no logits or labels.
inline mdood::EmbeddingSet random_set(std::mt19937_64& rng, Eigen::Index n, std::uint32_t k,
                                      std::uint32_t d) {
  mdood::EmbeddingSet set;
  set.k_layers = k;
  set.dim = d;
  set.embeddings = random_normal(rng, n, static_cast<Eigen::Index>(k) * d).cast<float>();
  return set;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mdood-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

#endif  // MDOOD_TESTS_HELPERS_HPP
