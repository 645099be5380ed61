#ifndef MDOOD_EMBEDDING_IO_HPP
#define MDOOD_EMBEDDING_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdood/linalg.hpp"

namespace mdood {

/// Label value marking an utterance of an unknown (out-of-distribution) class.
inline constexpr std::int32_t kUnknownLabel = -1;

/**
 * @brief Pooled per-layer embeddings of a batch of utterances, with optional
 * classifier logits and labels.
 *
 * `embeddings` is n x (k_layers * dim), row-major, so that layer `k` of
 * utterance `i` is the contiguous segment starting at `k * dim` of row `i`.
 * This is exactly the on-disk order of the EMB1 payload.
 */
struct EmbeddingSet {
  std::uint32_t k_layers = 0;
  std::uint32_t dim = 0;
  RowMatrix<float> embeddings;
  std::optional<RowMatrix<float>> logits;
  std::optional<std::vector<std::int32_t>> labels;

  std::uint64_t n() const { return static_cast<std::uint64_t>(embeddings.rows()); }
  std::uint32_t num_classes() const {
    return logits ? static_cast<std::uint32_t>(logits->cols()) : 0U;
  }

  auto layer(Eigen::Index i, std::uint32_t k) const {
    return embeddings.row(i).segment(static_cast<Eigen::Index>(k) * dim, dim);
  }

  /// All utterances at layer `k`, as an n x dim block.
  auto layer_block(std::uint32_t k) const {
    return embeddings.middleCols(static_cast<Eigen::Index>(k) * dim, dim);
  }

  bool operator==(const EmbeddingSet& other) const;
};

/// Throws the matching typed error if `set` violates an EmbeddingSet invariant.
void validate(const EmbeddingSet& set);

/// Rows `[begin, end)` of `set`, with logits and labels sliced alongside.
EmbeddingSet slice_rows(const EmbeddingSet& set, Eigen::Index begin, Eigen::Index end);

/// Concatenates two sets with identical shapes.
EmbeddingSet concat_rows(const EmbeddingSet& a, const EmbeddingSet& b);

// EMB1 wire format: see README for the byte layout.
inline constexpr char kEmbMagic[4] = {'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbVersion = 1;
inline constexpr std::uint32_t kFlagLogits = 1U << 0;
inline constexpr std::uint32_t kFlagLabels = 1U << 1;

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingSet& set);
EmbeddingSet parse_embeddings(std::span<const std::uint8_t> bytes);

EmbeddingSet read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

/// Optional JSON sidecar `{"classes": [...]}` naming each label id.
std::vector<std::string> read_class_manifest(const std::filesystem::path& path);
void write_class_manifest(const std::vector<std::string>& classes,
                          const std::filesystem::path& path);

namespace io_detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace io_detail

}  // namespace mdood

#endif  // MDOOD_EMBEDDING_IO_HPP
