#include "oracles.hpp"

#include "tcof/container.hpp"
#include "tcof/error.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

using tcof::Tensor;
using tcof::TensorContainer;

namespace {

// Little-endian u32 at `offset`.
std::uint32_t read_u32(const std::string& bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)]);
  return v;
}

}  // namespace

TEST_SUITE("container") {
  TEST_CASE("empty container is 12 bytes") {
    const std::string bytes = tcof::serialize_container({});
    REQUIRE(bytes.size() == 12);
    CHECK(bytes.substr(0, 4) == "TNSR");
    CHECK(read_u32(bytes, 4) == 1);
    CHECK(read_u32(bytes, 8) == 0);
    CHECK(tcof::parse_container(bytes).size() == 0);
  }

  TEST_CASE("byte layout of a single entry") {
    TensorContainer c;
    c.add("ab", Tensor({2, 2}, std::vector<float>{1.0f, -2.0f, 0.5f, 3.0f}));
    const std::string bytes = tcof::serialize_container(c);
    // header 12 + name_len 2 + name 2 + dtype 1 + rank 1 + dims 8 + data 16
    REQUIRE(bytes.size() == 42);
    CHECK(static_cast<unsigned char>(bytes[12]) == 2);
    CHECK(bytes[13] == 0);
    CHECK(bytes.substr(14, 2) == "ab");
    CHECK(bytes[16] == 0);
    CHECK(bytes[17] == 2);
    CHECK(read_u32(bytes, 18) == 2);
    CHECK(read_u32(bytes, 22) == 2);
    float second = 0;
    const std::uint32_t bits = read_u32(bytes, 30);
    std::memcpy(&second, &bits, 4);
    CHECK(second == -2.0f);
    CHECK(tcof::parse_container(bytes) == c);
  }

  TEST_CASE("100 random tensors round-trip bit-exactly") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> rank(0, 4), dim(1, 5);
    TensorContainer c;
    for (int i = 0; i < 100; ++i) {
      Tensor::Dims dims(rank(rng));
      for (auto& d : dims) d = dim(rng);
      Tensor t = oracle::random_tensor(dims, rng, -1e6f, 1e6f);
      c.add("t" + std::to_string(i), std::move(t));
    }
    const auto path = std::filesystem::temp_directory_path() / "tcof_container_roundtrip.tnsr";
    tcof::save_container(path, c);
    const TensorContainer back = tcof::load_container(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == 100);
    CHECK(back == c);
    CHECK(tcof::serialize_container(back) == tcof::serialize_container(c));
  }

  TEST_CASE("lookup and duplicates") {
    TensorContainer c;
    c.add("x", Tensor({1}, 1.0f));
    CHECK(c.contains("x"));
    CHECK_FALSE(c.contains("y"));
    CHECK(c.find("y") == nullptr);
    CHECK_THROWS(c.at("y"));
    CHECK_THROWS(c.add("x", Tensor({1})));
  }

  TEST_CASE("malformed input is a format error") {
    TensorContainer c;
    c.add("w", Tensor({3}, std::vector<float>{1, 2, 3}));
    const std::string good = tcof::serialize_container(c);

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(tcof::parse_container(bad_magic), tcof::FormatError);

    std::string bad_version = good;
    bad_version[4] = 2;
    CHECK_THROWS_AS(tcof::parse_container(bad_version), tcof::FormatError);

    for (std::size_t cut : {std::size_t{3}, std::size_t{11}, std::size_t{15}, good.size() - 1}) {
      CHECK_THROWS_AS(tcof::parse_container(good.substr(0, cut)), tcof::FormatError);
    }
    try {
      tcof::parse_container(good.substr(0, good.size() - 1));
      FAIL("expected a format error");
    } catch (const tcof::FormatError& e) {
      CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }

    CHECK_THROWS_AS(tcof::parse_container(good + "x"), tcof::FormatError);

    std::string bad_dtype = good;
    bad_dtype[12 + 2 + 1] = 7;
    CHECK_THROWS_AS(tcof::parse_container(bad_dtype), tcof::FormatError);
  }
}
