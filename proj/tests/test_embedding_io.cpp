#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "mdood/embedding_io.hpp"

using namespace mdood;

namespace {

constexpr std::size_t kHeaderBytes = 32;
constexpr std::size_t kCountOffset = 12;

EmbeddingSet labelled_set(std::uint64_t seed, Eigen::Index n, bool logits, bool labels) {
  std::mt19937_64 rng(seed);
  auto set = testing::random_set(rng, n, 3, 4);
  if (logits) set.logits = testing::random_normal(rng, n, 5).cast<float>();
  if (labels) {
    std::vector<std::int32_t> l(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) l[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i % 6) - 1;
    set.labels = l;
  }
  return set;
}

ErrorCode parse_error(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_embeddings(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("parse succeeded");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("EMB1 round trip") {
  for (bool logits : {false, true}) {
    for (bool labels : {false, true}) {
      CAPTURE(logits);
      CAPTURE(labels);
      const auto set = labelled_set(1, 10, logits, labels);
      const auto bytes = serialize_embeddings(set);
      std::size_t expected = kHeaderBytes + 4 * 10 * 12;
      if (logits) expected += 4 * 10 * 5;
      if (labels) expected += 4 * 10;
      CHECK(bytes.size() == expected);
      CHECK(parse_embeddings(bytes) == set);
      CHECK(serialize_embeddings(parse_embeddings(bytes)) == bytes);
    }
  }
}

TEST_CASE("EMB1 file round trip and path in errors") {
  testing::TempDir dir;
  const auto set = labelled_set(2, 7, true, true);
  write_embeddings(set, dir / "a.emb");
  CHECK(read_embeddings(dir / "a.emb") == set);

  try {
    read_embeddings(dir / "missing.emb");
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
    CHECK(std::string(e.what()).find("missing.emb") != std::string::npos);
  }
}

TEST_CASE("EMB1 rejects malformed input") {
  const auto set = labelled_set(3, 10, true, true);
  const auto good = serialize_embeddings(set);

  SUBCASE("bad magic") {
    auto bytes = good;
    std::memcpy(bytes.data(), "XXXX", 4);
    CHECK(parse_error(bytes) == ErrorCode::BadMagic);
    CHECK(parse_error({}) == ErrorCode::BadMagic);
  }

  SUBCASE("unsupported version") {
    auto bytes = good;
    bytes[4] = 2;
    CHECK(parse_error(bytes) == ErrorCode::UnsupportedVersion);
  }

  SUBCASE("header declares one row more than the payload holds") {
    const auto nine = serialize_embeddings(slice_rows(set, 0, 9));
    auto bytes = nine;
    bytes[kCountOffset] = 10;
    CHECK(parse_error(bytes) == ErrorCode::TruncatedPayload);
  }

  SUBCASE("truncated and padded") {
    auto shorter = good;
    shorter.pop_back();
    CHECK(parse_error(shorter) == ErrorCode::TruncatedPayload);
    auto header_only = std::vector<std::uint8_t>(good.begin(), good.begin() + 20);
    CHECK(parse_error(header_only) == ErrorCode::TruncatedPayload);
    auto longer = good;
    longer.push_back(0);
    CHECK(parse_error(longer) == ErrorCode::TrailingBytes);
  }

  SUBCASE("huge declared count does not allocate") {
    auto bytes = good;
    for (std::size_t i = 0; i < 8; ++i) bytes[kCountOffset + i] = 0xff;
    CHECK(parse_error(bytes) == ErrorCode::TruncatedPayload);
  }

  SUBCASE("NaN embedding") {
    auto bad = set;
    bad.embeddings(4, 2) = std::numeric_limits<float>::quiet_NaN();
    auto bytes = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + kHeaderBytes + 4 * (4 * 12 + 2), &nan, 4);
    CHECK(parse_error(bytes) == ErrorCode::NonFiniteValue);
    CHECK_THROWS_AS(serialize_embeddings(bad), Error);
  }

  SUBCASE("label out of range") {
    auto bytes = good;
    const std::int32_t label = 5;  // M = 5 is not a class index
    std::memcpy(bytes.data() + bytes.size() - 4, &label, 4);
    CHECK(parse_error(bytes) == ErrorCode::InvalidLabel);
    const std::int32_t minus_two = -2;
    std::memcpy(bytes.data() + bytes.size() - 4, &minus_two, 4);
    CHECK(parse_error(bytes) == ErrorCode::InvalidLabel);
  }

  SUBCASE("unknown flag bits") {
    auto bytes = good;
    bytes[8] |= 0x4;
    CHECK(parse_error(bytes) == ErrorCode::BadHeader);
  }
}

TEST_CASE("labels without logits") {
  const auto set = labelled_set(4, 6, false, true);
  const auto bytes = serialize_embeddings(set);
  std::uint32_t m = 99;
  std::memcpy(&m, bytes.data() + 28, 4);
  CHECK(m == 0);
  const auto back = parse_embeddings(bytes);
  CHECK(back.num_classes() == 0);
  CHECK(*back.labels == *set.labels);
}

TEST_CASE("random byte mutations never crash") {
  const auto good = serialize_embeddings(labelled_set(5, 8, true, true));
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pos(0, good.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    auto bytes = good;
    bytes[pos(rng)] = static_cast<std::uint8_t>(rng());
    if (trial % 5 == 0) bytes.resize(pos(rng));
    try {
      const auto set = parse_embeddings(bytes);
      validate(set);
    } catch (const Error&) {
    }
  }
}

TEST_CASE("slice and concat") {
  const auto set = labelled_set(6, 10, true, true);
  const auto a = slice_rows(set, 0, 4);
  const auto b = slice_rows(set, 4, 10);
  CHECK(a.n() == 4);
  CHECK(concat_rows(a, b) == set);
  CHECK(set.layer(3, 1) == set.embeddings.row(3).segment(4, 4));
  CHECK(set.layer_block(2).cols() == 4);
}

TEST_CASE("class manifest") {
  testing::TempDir dir;
  const std::vector<std::string> classes{"alice", "bob", "carol"};
  write_class_manifest(classes, dir / "classes.json");
  CHECK(read_class_manifest(dir / "classes.json") == classes);

  io_detail::write_file(dir / "bad.json", std::vector<std::uint8_t>{'[', ']'});
  CHECK_THROWS_AS(read_class_manifest(dir / "bad.json"), Error);
}
