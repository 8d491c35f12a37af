#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "aanet/error.hpp"
#include "aanet/tensorio.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aanet;

namespace {

std::string serialize(const FeatureMap& m) {
  std::ostringstream out(std::ios::binary);
  write_feature_map(m, out);
  return out.str();
}

ErrorCode read_error(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    read_feature_map(in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected read_feature_map to throw");
  return ErrorCode::kIo;
}

void poke_u32(std::string& bytes, std::size_t offset, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) bytes[offset + b] = static_cast<char>((v >> (8 * b)) & 0xff);
}

}  // namespace

TEST_CASE("smallest legal map serializes to a 24-byte file") {
  const FeatureMap m(1, 1, 1, {0.5F});
  const std::string bytes = serialize(m);
  REQUIRE(bytes.size() == 24);
  CHECK(bytes.substr(0, 4) == "AAFM");
  // version 1, W=H=C=1, all little-endian
  const unsigned char expected_header[20] = {'A', 'A', 'F', 'M', 1, 0, 0, 0, 1, 0,
                                             0,   0,   1,   0,   0, 0, 1, 0, 0, 0};
  CHECK(std::memcmp(bytes.data(), expected_header, 20) == 0);
  float payload = 0.0F;
  std::memcpy(&payload, bytes.data() + 20, 4);
  CHECK(payload == 0.5F);
}

TEST_CASE("24x24x384 map has a 884736-byte payload after a 20-byte header") {
  std::mt19937_64 rng(1);
  const auto m = testing_support::random_map(24, 24, 384, rng);
  CHECK(serialize(m).size() == 884736 + 20);
}

TEST_CASE("write then read reproduces the map bit for bit") {
  std::mt19937_64 rng(7);
  const auto m = testing_support::random_map(8, 8, 16, rng);
  const std::string bytes = serialize(m);
  std::istringstream in(bytes, std::ios::binary);
  const FeatureMap back = read_feature_map(in);
  CHECK(back == m);
  CHECK(serialize(back) == bytes);
  CHECK(serialize(m) == bytes);  // determinism
}

TEST_CASE("payload layout is h-major, then w, then c") {
  // value encodes (h, w, c) so positions can be checked directly
  std::vector<float> data;
  for (int h = 0; h < 2; ++h)
    for (int w = 0; w < 3; ++w)
      for (int c = 0; c < 2; ++c) data.push_back(static_cast<float>(100 * h + 10 * w + c));
  const FeatureMap m(3, 2, 2, data);
  CHECK(m.at(2, 1)[1] == 121.0F);
  const std::string bytes = serialize(m);
  float v = 0.0F;
  std::memcpy(&v, bytes.data() + 20 + 4 * ((1 * 3 + 2) * 2 + 1), 4);
  CHECK(v == 121.0F);
}

TEST_CASE("read errors carry distinct codes") {
  std::mt19937_64 rng(3);
  const std::string good = serialize(testing_support::random_map(2, 2, 3, rng));

  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    CHECK(read_error(b) == ErrorCode::kBadMagic);
    CHECK(read_error("") == ErrorCode::kBadMagic);
  }
  SUBCASE("version mismatch") {
    std::string b = good;
    poke_u32(b, 4, 2);
    CHECK(read_error(b) == ErrorCode::kVersionMismatch);
  }
  SUBCASE("truncated by one byte") {
    CHECK(read_error(good.substr(0, good.size() - 1)) == ErrorCode::kLengthMismatch);
  }
  SUBCASE("truncated header") {
    CHECK(read_error(good.substr(0, 10)) == ErrorCode::kLengthMismatch);
  }
  SUBCASE("trailing bytes") {
    CHECK(read_error(good + "x") == ErrorCode::kLengthMismatch);
  }
  SUBCASE("zero width") {
    std::string b = good;
    poke_u32(b, 8, 0);
    CHECK(read_error(b) == ErrorCode::kBadDimensions);
  }
  SUBCASE("NaN in payload") {
    std::string b = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(b.data() + 24, &nan, 4);
    CHECK(read_error(b) == ErrorCode::kNonFinite);
  }
}

TEST_CASE("non-finite maps cannot be constructed or written") {
  CHECK_THROWS_AS(FeatureMap(1, 1, 1, {std::numeric_limits<float>::infinity()}), Error);
  CHECK_THROWS_AS(FeatureMap(1, 1, 2, {1.0F}), Error);
  CHECK_THROWS_AS(FeatureMap(0, 1, 1, {}), Error);
}

TEST_CASE("file save and load round trip") {
  std::mt19937_64 rng(11);
  const auto m = testing_support::random_map(6, 6, 5, rng);
  const auto dir = testing_support::scratch_dir("tensorio");
  save_feature_map(m, dir / "a.aafm");
  CHECK(load_feature_map(dir / "a.aafm") == m);
  CHECK_THROWS_AS(load_feature_map(dir / "missing.aafm"), Error);
}

TEST_CASE("grid and descriptor invariants") {
  CHECK_THROWS_AS(GlobalDescriptor({1.0F, 1.0F}), Error);
  CHECK(GlobalDescriptor::normalized({3.0F, 4.0F}).values()[0] == doctest::Approx(0.6));
  CHECK_THROWS_AS(LocalFeatureGrid(1, 2, {2.0F, 0.0F}), Error);
  const auto g = LocalFeatureGrid::normalized(1, 2, {2.0F, 0.0F});
  CHECK(g.cell(0, 0)[0] == 1.0F);
  // an all-zero cell has no direction and stays zero
  CHECK_NOTHROW(LocalFeatureGrid(1, 2, {0.0F, 0.0F}));
}
