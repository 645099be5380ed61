#ifndef MDOOD_SYNTH_HPP
#define MDOOD_SYNTH_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdood/embedding_io.hpp"

/**
 * @file synth.hpp
 *
 * @brief Deterministic Gaussian-mixture embedding sets for desk-scale testing.
 *
 * Generator contract (frozen; changing it changes every synthetic number):
 *  - bits come from `std::mt19937_64` seeded with `SynthConfig::seed`;
 *  - a uniform double is `(bits >> 11) * 2^-53`, in [0, 1);
 *  - a standard normal comes from the Marsaglia polar method on pairs of
 *    uniforms mapped to [-1, 1), the second value of each pair being cached.
 *
 * Draw order: for each layer, each class's mean direction then its
 * covariance, then the layer's unknown-class direction; then train rows,
 * known test rows and unknown test rows, each row drawing all layers in order
 * and then its logits.
 */

namespace mdood {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::uint64_t n_train = 1000;
  std::uint64_t n_test_id = 500;
  std::uint64_t n_test_ood = 500;
  std::uint32_t M = 4;
  std::uint32_t K = 4;
  std::uint32_t d = 16;
  double class_sep = 3.0;   ///< norm of each class mean, in within-class sigma
  double ood_shift = 6.0;   ///< unknown-row offset along a held-out direction
  double logit_noise = 1.0;
  /// Layers that carry the unknown-row offset; empty means all of them.
  std::vector<std::uint32_t> ood_layers;
};

/// Throws `BadConfig` on an invalid configuration.
void validate(const SynthConfig& config);

struct SynthData {
  EmbeddingSet train;
  EmbeddingSet test;
};

/**
 * @brief Draws a train set (known classes only, labels round-robin) and a test
 * set of `n_test_id` known rows followed by `n_test_ood` unknown rows.
 *
 * Each class/layer is a Gaussian with a random unit-trace covariance, so the
 * average within-class sigma per coordinate is `1/sqrt(d)`; class mean norms
 * and the unknown-row offset are both measured in that sigma. Unknown rows
 * start from a fresh draw of the known mixture and are shifted along a unit
 * direction orthogonal to that layer's class means.
 */
SynthData generate(const SynthConfig& config);

/// Parses a JSON object whose keys are the SynthConfig field names. Missing
/// keys keep their defaults; unknown keys are rejected.
SynthConfig parse_synth_config(const std::string& json_text);
std::string synth_config_to_json(const SynthConfig& config);

/// The frozen random source described above.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace mdood

#endif  // MDOOD_SYNTH_HPP
