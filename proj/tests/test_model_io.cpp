#include <doctest.h>

#include <cstring>

#include "helpers.hpp"
#include "mdood/model.hpp"

using namespace mdood;

namespace {

ModelArtifact small_model(std::uint32_t k, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  const auto train = testing::random_set(rng, 60, k, 3);
  FitConfig cfg;
  cfg.contamination = 0.05;
  return fit_model(train, cfg);
}

ErrorCode parse_error(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_model(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("parse succeeded");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("MDL1 round trip gives identical scores") {
  testing::TempDir dir;
  const auto model = small_model(4);
  save_model(model, dir / "m.mdl");
  const auto back = load_model(dir / "m.mdl");
  CHECK(back == model);
  CHECK(serialize_model(back) == serialize_model(model));

  std::mt19937_64 rng(7);
  const auto test = testing::random_set(rng, 25, 4, 3);
  const Vector<double> a = rejection_scores(model, test);
  const Vector<double> b = rejection_scores(back, test);
  CHECK(a == b);
}

TEST_CASE("MDL1 size follows the layout") {
  const auto model = small_model(2);
  const std::size_t d = 3, k = 2, n = 60;
  const std::size_t expected =
      4 + 4 + 4 + 4 + 8 + 1 + k * (8 * d + 8 * d * d + 8) + 4 + 8 + 8 + 8 + 8 * n * k;
  CHECK(serialize_model(model).size() == expected);
}

TEST_CASE("layer count mismatch surfaces at featurize") {
  const auto model = small_model(12);
  std::mt19937_64 rng(3);
  const auto data = testing::random_set(rng, 5, 11, 3);
  try {
    rejection_scores(model, data);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("MDL1 rejects malformed input") {
  const auto good = serialize_model(small_model(2));

  auto shorter = good;
  shorter.pop_back();
  CHECK(parse_error(shorter) == ErrorCode::TruncatedPayload);

  auto longer = good;
  longer.push_back(1);
  CHECK(parse_error(longer) == ErrorCode::TrailingBytes);

  auto version = good;
  version[4] = 9;
  CHECK(parse_error(version) == ErrorCode::VersionMismatch);

  auto magic = good;
  std::memcpy(magic.data(), "EMB1", 4);
  CHECK(parse_error(magic) == ErrorCode::BadMagic);

  auto tanh_flag = good;
  tanh_flag[24] = 7;
  CHECK(parse_error(tanh_flag) == ErrorCode::BadHeader);

  for (std::size_t cut = 0; cut < good.size(); cut += 7) {
    std::vector<std::uint8_t> prefix(good.begin(), good.begin() + static_cast<long>(cut));
    CHECK_THROWS_AS(parse_model(prefix), Error);
  }
}

TEST_CASE("load_model names the file") {
  testing::TempDir dir;
  io_detail::write_file(dir / "junk.mdl", std::vector<std::uint8_t>{'n', 'o', 'p', 'e', 0});
  try {
    load_model(dir / "junk.mdl");
    FAIL("expected BadMagic");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadMagic);
    CHECK(std::string(e.what()).find("junk.mdl") != std::string::npos);
  }
}
