#include "mdood/synth.hpp"

#include <cmath>

#include <json.hpp>

namespace mdood {

double SynthRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

void validate(const SynthConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
  if (config.n_train < 1 || config.n_test_id < 1) fail("n_train and n_test_id must be at least 1");
  if (config.M < 2) fail("M must be at least 2");
  if (config.n_train < 2ULL * config.M) fail("n_train must give every class at least two rows");
  if (config.K < 1 || config.d < 1) fail("K and d must be at least 1");
  for (double v : {config.class_sep, config.ood_shift, config.logit_noise}) {
    if (!(v >= 0) || !std::isfinite(v)) fail("class_sep, ood_shift and logit_noise must be finite and >= 0");
  }
  for (auto k : config.ood_layers) {
    if (k >= config.K) fail("ood_layers entry " + std::to_string(k) + " out of range");
  }
}

namespace {

Vector<double> normal_vector(SynthRng& rng, Eigen::Index d) {
  Vector<double> v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = rng.normal();
  return v;
}

Vector<double> unit_vector(SynthRng& rng, Eigen::Index d) {
  Vector<double> v = normal_vector(rng, d);
  while (v.norm() == 0.0) v = normal_vector(rng, d);
  return v / v.norm();
}

struct LayerMixture {
  Matrix<double> means;                 // d x M
  std::vector<Matrix<double>> factors;  // per class, lower Cholesky factor
  Vector<double> ood_direction;  // already scaled by the shift
  bool shifted = true;
};

LayerMixture draw_layer(SynthRng& rng, const SynthConfig& config) {
  const auto d = static_cast<Eigen::Index>(config.d);
  // Unit-trace covariances put the average per-coordinate sigma at 1/sqrt(d).
  const double sigma = 1.0 / std::sqrt(static_cast<double>(d));
  LayerMixture layer;
  layer.means.resize(d, config.M);
  for (std::uint32_t c = 0; c < config.M; ++c) {
    layer.means.col(c) = config.class_sep * sigma * unit_vector(rng, d);

    Matrix<double> A(d, d);
    for (Eigen::Index j = 0; j < A.size(); ++j) A(j) = rng.normal();
    Matrix<double> cov = A * A.transpose() / static_cast<double>(d);
    cov.diagonal().array() += 0.25;
    cov /= cov.trace();
    layer.factors.emplace_back(Eigen::LLT<Matrix<double>>(cov).matrixL());
  }

  Vector<double> u = unit_vector(rng, d);
  if (d > static_cast<Eigen::Index>(config.M) && config.class_sep > 0) {
    Eigen::HouseholderQR<Matrix<double>> qr(layer.means);
    const Matrix<double> q =
        qr.householderQ() * Matrix<double>::Identity(d, static_cast<Eigen::Index>(config.M));
    u -= q * (q.transpose() * u);
    u.normalize();
  }
  layer.ood_direction = config.ood_shift * sigma * u;
  return layer;
}

void draw_row(SynthRng& rng, const SynthConfig& config, const std::vector<LayerMixture>& layers,
              std::uint32_t cls, bool unknown, EmbeddingSet& set, Eigen::Index row) {
  const auto d = static_cast<Eigen::Index>(config.d);
  for (std::uint32_t k = 0; k < config.K; ++k) {
    const auto& layer = layers[k];
    Vector<double> x = layer.means.col(cls) + layer.factors[cls] * normal_vector(rng, d);
    if (unknown && layer.shifted) x += layer.ood_direction;
    set.embeddings.row(row).segment(static_cast<Eigen::Index>(k) * d, d) =
        x.transpose().cast<float>();
  }
  auto logits = set.logits->row(row);
  for (std::uint32_t m = 0; m < config.M; ++m) {
    const double base = (!unknown && m == cls) ? 10.0 : 0.0;
    logits(m) = static_cast<float>(base + config.logit_noise * rng.normal());
  }
}

EmbeddingSet empty_set(const SynthConfig& config, std::uint64_t n) {
  EmbeddingSet set;
  set.k_layers = config.K;
  set.dim = config.d;
  set.embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(config.K) * config.d);
  set.logits = RowMatrix<float>(static_cast<Eigen::Index>(n), config.M);
  set.labels = std::vector<std::int32_t>(n);
  return set;
}

}  // namespace

SynthData generate(const SynthConfig& config) {
  validate(config);
  SynthRng rng(config.seed);

  std::vector<LayerMixture> layers;
  for (std::uint32_t k = 0; k < config.K; ++k) layers.push_back(draw_layer(rng, config));
  if (!config.ood_layers.empty()) {
    for (auto& layer : layers) layer.shifted = false;
    for (auto k : config.ood_layers) layers[k].shifted = true;
  }

  SynthData out;
  out.train = empty_set(config, config.n_train);
  for (std::uint64_t i = 0; i < config.n_train; ++i) {
    const auto cls = static_cast<std::uint32_t>(i % config.M);
    draw_row(rng, config, layers, cls, false, out.train, static_cast<Eigen::Index>(i));
    (*out.train.labels)[i] = static_cast<std::int32_t>(cls);
  }

  out.test = empty_set(config, config.n_test_id + config.n_test_ood);
  for (std::uint64_t i = 0; i < config.n_test_id; ++i) {
    const auto cls = static_cast<std::uint32_t>(i % config.M);
    draw_row(rng, config, layers, cls, false, out.test, static_cast<Eigen::Index>(i));
    (*out.test.labels)[i] = static_cast<std::int32_t>(cls);
  }
  for (std::uint64_t i = 0; i < config.n_test_ood; ++i) {
    const auto cls = std::min<std::uint32_t>(
        static_cast<std::uint32_t>(rng.uniform() * config.M), config.M - 1);
    const auto row = static_cast<Eigen::Index>(config.n_test_id + i);
    draw_row(rng, config, layers, cls, true, out.test, row);
    (*out.test.labels)[config.n_test_id + i] = kUnknownLabel;
  }
  return out;
}

SynthConfig parse_synth_config(const std::string& json_text) {
  const auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::BadConfig, "synth config must be a JSON object");
  }
  SynthConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "n_train") config.n_train = value.get<std::uint64_t>();
      else if (key == "n_test_id") config.n_test_id = value.get<std::uint64_t>();
      else if (key == "n_test_ood") config.n_test_ood = value.get<std::uint64_t>();
      else if (key == "M") config.M = value.get<std::uint32_t>();
      else if (key == "K") config.K = value.get<std::uint32_t>();
      else if (key == "d") config.d = value.get<std::uint32_t>();
      else if (key == "class_sep") config.class_sep = value.get<double>();
      else if (key == "ood_shift") config.ood_shift = value.get<double>();
      else if (key == "logit_noise") config.logit_noise = value.get<double>();
      else if (key == "ood_layers") config.ood_layers = value.get<std::vector<std::uint32_t>>();
      else throw Error(ErrorCode::BadConfig, "unknown synth config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("synth config: ") + e.what());
  }
  validate(config);
  return config;
}

std::string synth_config_to_json(const SynthConfig& config) {
  nlohmann::json doc = {
      {"seed", config.seed},
      {"n_train", config.n_train},
      {"n_test_id", config.n_test_id},
      {"n_test_ood", config.n_test_ood},
      {"M", config.M},
      {"K", config.K},
      {"d", config.d},
      {"class_sep", config.class_sep},
      {"ood_shift", config.ood_shift},
      {"logit_noise", config.logit_noise},
      {"ood_layers", config.ood_layers},
  };
  return doc.dump(2) + "\n";
}

}  // namespace mdood
