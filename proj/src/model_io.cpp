#include <cmath>
#include <cstring>

#include "byte_codec.hpp"
#include "mdood/model.hpp"

namespace mdood {

namespace {

void check_model(const ModelArtifact& model) {
  const auto& stats = model.layer_stats;
  if (stats.k_layers < 1 || stats.dim < 1) {
    throw Error(ErrorCode::BadHeader, "model needs k_layers and dim of at least 1");
  }
  if (stats.per_layer.size() != stats.k_layers || stats.w.size() != stats.k_layers) {
    throw Error(ErrorCode::DimensionMismatch, "layer count differs from k_layers");
  }
  for (std::uint32_t k = 0; k < stats.k_layers; ++k) {
    const auto& fit = stats.per_layer[k];
    const auto d = static_cast<Eigen::Index>(stats.dim);
    if (fit.mean.size() != d || fit.chol_lower.rows() != d || fit.chol_lower.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(k) + " has wrong shape");
    }
    if (!fit.mean.allFinite() || !fit.chol_lower.allFinite()) {
      throw Error(ErrorCode::NonFiniteValue, "layer " + std::to_string(k) + " is not finite");
    }
    const bool lower = fit.chol_lower.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0);
    if (!lower || !(fit.chol_lower.diagonal().array() > 0).all()) {
      throw Error(ErrorCode::BadHeader,
                  "layer " + std::to_string(k) + " factor is not lower triangular with positive diagonal");
    }
    const double w = stats.w(static_cast<Eigen::Index>(k));
    if (!(w > 0) || !std::isfinite(w)) {
      throw Error(ErrorCode::BadHeader, "layer scale must be positive and finite");
    }
  }
  const auto& knn = model.knn;
  if (knn.train_features.cols() != static_cast<Eigen::Index>(stats.k_layers)) {
    throw Error(ErrorCode::DimensionMismatch, "stored features do not have k_layers columns");
  }
  if (knn.k_neighbors < 1 || knn.train_features.rows() < knn.k_neighbors) {
    throw Error(ErrorCode::BadHeader, "neighbor count exceeds stored training rows");
  }
  if (!(knn.contamination > 0 && knn.contamination < 0.5)) {
    throw Error(ErrorCode::BadContamination, "stored contamination out of (0, 0.5)");
  }
  if (!knn.train_features.allFinite() || !std::isfinite(knn.delta) || !std::isfinite(model.ridge0)) {
    throw Error(ErrorCode::NonFiniteValue, "model contains NaN or Inf");
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelArtifact& model) {
  check_model(model);
  const auto& stats = model.layer_stats;
  const auto d = static_cast<Eigen::Index>(stats.dim);

  codec::Writer w;
  w.put_bytes(kModelMagic, 4);
  w.put(model.version);
  w.put(stats.k_layers);
  w.put(stats.dim);
  w.put(model.ridge0);
  w.put(static_cast<std::uint8_t>(stats.tanh_enabled ? 1 : 0));
  for (std::uint32_t k = 0; k < stats.k_layers; ++k) {
    const auto& fit = stats.per_layer[k];
    w.put_array(fit.mean.data(), static_cast<std::size_t>(d));
    const RowMatrix<double> factor = fit.chol_lower;
    w.put_array(factor.data(), static_cast<std::size_t>(d * d));
    w.put(stats.w(static_cast<Eigen::Index>(k)));
  }
  const auto& knn = model.knn;
  w.put(static_cast<std::uint32_t>(knn.k_neighbors));
  w.put(knn.contamination);
  w.put(knn.delta);
  w.put(static_cast<std::uint64_t>(knn.train_features.rows()));
  w.put_array(knn.train_features.data(), static_cast<std::size_t>(knn.train_features.size()));
  return w.take();
}

ModelArtifact parse_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not an MDL1 file");
  }
  codec::Reader r(bytes.subspan(4));
  ModelArtifact model;
  model.version = r.get<std::uint32_t>("header");
  if (model.version != kModelVersion) {
    throw Error(ErrorCode::VersionMismatch, "MDL1 version " + std::to_string(model.version) +
                                                ", reader understands " +
                                                std::to_string(kModelVersion));
  }
  auto& stats = model.layer_stats;
  stats.k_layers = r.get<std::uint32_t>("header");
  stats.dim = r.get<std::uint32_t>("header");
  model.ridge0 = r.get<double>("header");
  const auto tanh_flag = r.get<std::uint8_t>("header");
  if (tanh_flag > 1) {
    throw Error(ErrorCode::BadHeader, "tanh flag must be 0 or 1");
  }
  stats.tanh_enabled = tanh_flag == 1;
  if (stats.k_layers < 1 || stats.dim < 1) {
    throw Error(ErrorCode::BadHeader, "model needs k_layers and dim of at least 1");
  }

  const std::uint64_t d = stats.dim;
  const std::uint64_t layer_words =
      codec::checked_mul(d, d, "covariance factor") + d + 1;
  const std::uint64_t all_layers = codec::checked_mul(layer_words, stats.k_layers, "layers");
  if (all_layers > r.remaining() / 8) {
    throw Error(ErrorCode::TruncatedPayload, "file ends inside layer statistics");
  }

  const auto dd = static_cast<Eigen::Index>(d);
  stats.per_layer.resize(stats.k_layers);
  stats.w.resize(stats.k_layers);
  for (std::uint32_t k = 0; k < stats.k_layers; ++k) {
    auto& fit = stats.per_layer[k];
    fit.mean.resize(dd);
    r.get_array(fit.mean.data(), d, "layer mean");
    RowMatrix<double> factor(dd, dd);
    r.get_array(factor.data(), d * d, "layer factor");
    fit.chol_lower = factor;
    stats.w(static_cast<Eigen::Index>(k)) = r.get<double>("layer scale");
  }

  auto& knn = model.knn;
  knn.k_neighbors = static_cast<int>(r.get<std::uint32_t>("detector header"));
  knn.contamination = r.get<double>("detector header");
  knn.delta = r.get<double>("detector header");
  const auto n_train = r.get<std::uint64_t>("detector header");
  const std::uint64_t words = codec::checked_mul(n_train, stats.k_layers, "training features");
  if (words > r.remaining() / 8) {
    throw Error(ErrorCode::TruncatedPayload, "file ends inside training features");
  }
  knn.train_features.resize(static_cast<Eigen::Index>(n_train), stats.k_layers);
  r.get_array(knn.train_features.data(), words, "training features");
  r.expect_end();

  check_model(model);
  return model;
}

void save_model(const ModelArtifact& model, const std::filesystem::path& path) {
  io_detail::write_file(path, serialize_model(model));
}

ModelArtifact load_model(const std::filesystem::path& path) {
  const auto bytes = io_detail::read_file(path);
  try {
    return parse_model(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace mdood
