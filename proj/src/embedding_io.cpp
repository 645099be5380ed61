#include "mdood/embedding_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "byte_codec.hpp"

namespace mdood {

namespace {

void check_label(std::int32_t label, std::uint32_t num_classes, std::uint64_t row) {
  const bool ok = label == kUnknownLabel ||
                  (label >= 0 && (num_classes == 0 ||
                                  static_cast<std::uint32_t>(label) < num_classes));
  if (!ok) {
    throw Error(ErrorCode::InvalidLabel,
                "row " + std::to_string(row) + " has label " + std::to_string(label));
  }
}

template <typename Derived>
void check_finite(const Eigen::DenseBase<Derived>& values, const char* what) {
  if (!values.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, std::string(what) + " contain NaN or Inf");
  }
}

}  // namespace

bool EmbeddingSet::operator==(const EmbeddingSet& other) const {
  auto same_bits = [](const RowMatrix<float>& a, const RowMatrix<float>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
  };
  if (k_layers != other.k_layers || dim != other.dim) return false;
  if (!same_bits(embeddings, other.embeddings)) return false;
  if (logits.has_value() != other.logits.has_value()) return false;
  if (logits && !same_bits(*logits, *other.logits)) return false;
  return labels == other.labels;
}

void validate(const EmbeddingSet& set) {
  if (set.embeddings.rows() < 1) {
    throw Error(ErrorCode::EmptyInput, "embedding set has no utterances");
  }
  if (set.k_layers < 1 || set.dim < 1) {
    throw Error(ErrorCode::BadHeader, "k_layers and dim must be at least 1");
  }
  if (set.embeddings.cols() != static_cast<Eigen::Index>(set.k_layers) * set.dim) {
    throw Error(ErrorCode::DimensionMismatch, "embedding row length is not k_layers * dim");
  }
  check_finite(set.embeddings, "embeddings");
  if (set.logits) {
    if (set.logits->rows() != set.embeddings.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "logit rows do not match utterance count");
    }
    if (set.logits->cols() < 2) {
      throw Error(ErrorCode::BadHeader, "logits need at least two classes");
    }
    check_finite(*set.logits, "logits");
  }
  if (set.labels) {
    if (set.labels->size() != set.n()) {
      throw Error(ErrorCode::DimensionMismatch, "label count does not match utterance count");
    }
    for (std::size_t i = 0; i < set.labels->size(); ++i) {
      check_label((*set.labels)[i], set.num_classes(), i);
    }
  }
}

EmbeddingSet slice_rows(const EmbeddingSet& set, Eigen::Index begin, Eigen::Index end) {
  EmbeddingSet out;
  out.k_layers = set.k_layers;
  out.dim = set.dim;
  out.embeddings = set.embeddings.middleRows(begin, end - begin);
  if (set.logits) out.logits = set.logits->middleRows(begin, end - begin);
  if (set.labels) {
    out.labels.emplace(set.labels->begin() + begin, set.labels->begin() + end);
  }
  return out;
}

EmbeddingSet concat_rows(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.k_layers != b.k_layers || a.dim != b.dim || a.num_classes() != b.num_classes() ||
      a.labels.has_value() != b.labels.has_value()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot concatenate sets of different shape");
  }
  EmbeddingSet out;
  out.k_layers = a.k_layers;
  out.dim = a.dim;
  out.embeddings.resize(a.embeddings.rows() + b.embeddings.rows(), a.embeddings.cols());
  out.embeddings << a.embeddings, b.embeddings;
  if (a.logits) {
    RowMatrix<float> logits(a.logits->rows() + b.logits->rows(), a.logits->cols());
    logits << *a.logits, *b.logits;
    out.logits = std::move(logits);
  }
  if (a.labels) {
    std::vector<std::int32_t> labels = *a.labels;
    labels.insert(labels.end(), b.labels->begin(), b.labels->end());
    out.labels = std::move(labels);
  }
  return out;
}

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingSet& set) {
  validate(set);
  const std::uint64_t n = set.n();
  const std::uint32_t m = set.num_classes();
  std::uint32_t flags = 0;
  if (set.logits) flags |= kFlagLogits;
  if (set.labels) flags |= kFlagLabels;

  codec::Writer w;
  w.reserve(36 + sizeof(float) * static_cast<std::size_t>(set.embeddings.size()));
  w.put_bytes(kEmbMagic, 4);
  w.put(kEmbVersion);
  w.put(flags);
  w.put(n);
  w.put(set.k_layers);
  w.put(set.dim);
  w.put(m);
  w.put_array(set.embeddings.data(), static_cast<std::size_t>(set.embeddings.size()));
  if (set.logits) {
    w.put_array(set.logits->data(), static_cast<std::size_t>(set.logits->size()));
  }
  if (set.labels) {
    w.put_array(set.labels->data(), set.labels->size());
  }
  return w.take();
}

EmbeddingSet parse_embeddings(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not an EMB1 file");
  }
  codec::Reader r(bytes.subspan(4));
  const auto version = r.get<std::uint32_t>("header");
  if (version != kEmbVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "EMB1 version " + std::to_string(version));
  }
  const auto flags = r.get<std::uint32_t>("header");
  const auto n = r.get<std::uint64_t>("header");
  const auto k_layers = r.get<std::uint32_t>("header");
  const auto dim = r.get<std::uint32_t>("header");
  const auto num_classes = r.get<std::uint32_t>("header");

  if ((flags & ~(kFlagLogits | kFlagLabels)) != 0) {
    throw Error(ErrorCode::BadHeader, "unknown flag bits set");
  }
  if (n < 1 || k_layers < 1 || dim < 1) {
    throw Error(ErrorCode::BadHeader, "n, k_layers and dim must be at least 1");
  }
  const bool has_logits = (flags & kFlagLogits) != 0;
  const bool has_labels = (flags & kFlagLabels) != 0;
  if (has_logits ? num_classes < 2 : num_classes != 0) {
    throw Error(ErrorCode::BadHeader,
                "num_classes " + std::to_string(num_classes) + " inconsistent with logits flag");
  }

  // Size the payload before allocating anything.
  const std::uint64_t row_len = codec::checked_mul(k_layers, dim, "embedding row");
  const std::uint64_t n_emb = codec::checked_mul(n, row_len, "embeddings");
  const std::uint64_t n_logit = has_logits ? codec::checked_mul(n, num_classes, "logits") : 0;
  const std::uint64_t n_label = has_labels ? n : 0;
  const std::uint64_t words = n_emb + n_logit + n_label;
  if (words < n_emb || words > r.remaining() / 4) {
    throw Error(ErrorCode::TruncatedPayload, "payload shorter than header declares");
  }
  if (words * 4 != r.remaining()) {
    throw Error(ErrorCode::TrailingBytes, "payload longer than header declares");
  }

  EmbeddingSet set;
  set.k_layers = k_layers;
  set.dim = dim;
  set.embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(row_len));
  r.get_array(set.embeddings.data(), n_emb, "embeddings");
  check_finite(set.embeddings, "embeddings");
  if (has_logits) {
    RowMatrix<float> logits(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(num_classes));
    r.get_array(logits.data(), n_logit, "logits");
    check_finite(logits, "logits");
    set.logits = std::move(logits);
  }
  if (has_labels) {
    std::vector<std::int32_t> labels(n);
    r.get_array(labels.data(), n, "labels");
    for (std::uint64_t i = 0; i < n; ++i) check_label(labels[i], num_classes, i);
    set.labels = std::move(labels);
  }
  r.expect_end();
  return set;
}

namespace io_detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::IoFailure, "error while reading " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::IoFailure, "error while writing " + path.string());
  }
}

}  // namespace io_detail

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  const auto bytes = io_detail::read_file(path);
  try {
    return parse_embeddings(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  io_detail::write_file(path, serialize_embeddings(set));
}

std::vector<std::string> read_class_manifest(const std::filesystem::path& path) {
  const auto bytes = io_detail::read_file(path);
  const auto doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("classes") ||
      !doc["classes"].is_array()) {
    throw Error(ErrorCode::BadHeader, path.string() + ": expected {\"classes\": [...]}");
  }
  std::vector<std::string> classes;
  for (const auto& name : doc["classes"]) {
    if (!name.is_string()) {
      throw Error(ErrorCode::BadHeader, path.string() + ": class names must be strings");
    }
    classes.push_back(name.get<std::string>());
  }
  return classes;
}

void write_class_manifest(const std::vector<std::string>& classes,
                          const std::filesystem::path& path) {
  const std::string text = nlohmann::json{{"classes", classes}}.dump(2) + "\n";
  io_detail::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace mdood
