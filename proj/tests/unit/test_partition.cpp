#include <cstring>
#include <fstream>

#include "chicle/core.hpp"
#include "chicle/errors.hpp"
#include "chicle/ingest.hpp"
#include "doctest.h"
#include "support/generators.hpp"

using namespace chicle;

namespace {

template <typename T>
void poke(std::vector<std::byte>& b, std::size_t at, T v) {
  std::memcpy(b.data() + at, &v, sizeof(T));
}

template <typename T>
T peek(const std::vector<std::byte>& b, std::size_t at) {
  T v;
  std::memcpy(&v, b.data() + at, sizeof(T));
  return v;
}

PartitionBuffer one_example() {
  const Datapoint dp{0, 2.0f};
  return PartitionBuilder(3, 1).add(1.0f, std::span(&dp, 1)).build();
}

}  // namespace

TEST_CASE("empty partition encodes to a header-only image") {
  const auto p = PartitionBuilder(0, 5).build();
  const auto img = encode_partition(p);
  CHECK(img.size() == layout::kHeaderBytes);
  CHECK(peek<std::uint64_t>(img, 32) == 0);
  CHECK(peek<std::uint64_t>(img, 40) == 0);
  CHECK(peek<std::uint64_t>(img, 48) == 0);
  CHECK(decode_partition(img) == p);
}

TEST_CASE("single example roundtrips") {
  const auto p = one_example();
  const auto q = decode_partition(encode_partition(p));
  CHECK(q == p);
  REQUIRE(q.num_examples() == 1);
  CHECK(q.id() == 3);
  CHECK(q.label(0) == 1.0f);
  CHECK(q.datapoints(0)[0].feature == 0);
  CHECK(q.datapoints(0)[0].value == 2.0f);
  CHECK(q.alphas()[0] == 0.0);
  CHECK(q.squared_norm(0) == 4.0);
}

TEST_CASE("fixture partition is stable under encode-decode-encode") {
  std::ifstream in(CHICLE_TEST_DATA "/tiny.svm");
  const auto data = parse_libsvm(in);
  PartitionBuilder b(0, data.num_features);
  for (std::size_t i = 0; i < 3; ++i) b.add(data.examples[i].label, data.examples[i].datapoints);
  const auto img = encode_partition(b.build());
  CHECK(encode_partition(decode_partition(img)) == img);
}

TEST_CASE("regions are ordered, disjoint and cover the block") {
  gen::Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const auto p = gen::partition(rng, t);
    const auto img = encode_partition(p);
    const auto n = p.num_examples();
    const auto table = peek<std::uint64_t>(img, 32);
    const auto dps = peek<std::uint64_t>(img, 40);
    const auto dual = peek<std::uint64_t>(img, 48);
    CHECK(table == n * sizeof(ExampleEntry));
    CHECK(dual == n * sizeof(double));
    CHECK(dps == p.nnz() * sizeof(Datapoint));
    CHECK(layout::kHeaderBytes + table + dps + dual == img.size());
    std::uint64_t expect = layout::kHeaderBytes + table;
    for (const auto& e : p.examples()) {
      CHECK(e.dp_offset == expect);
      expect += e.size * sizeof(Datapoint);
    }
  }
}

TEST_CASE("alphas survive the roundtrip exactly") {
  gen::Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    auto p = gen::partition(rng, t);
    const auto q = decode_partition(encode_partition(p));
    REQUIRE(q.num_examples() == p.num_examples());
    for (std::size_t i = 0; i < p.num_examples(); ++i) {
      CHECK(std::memcmp(&q.alphas()[i], &p.alphas()[i], sizeof(double)) == 0);
      CHECK(in_dual_box(q.alphas()[i], q.label(i)));
    }
  }
}

TEST_CASE("decoding rejects malformed images") {
  const Datapoint dps[2] = {{0, 1.0f}, {2, -1.0f}};
  const auto good = encode_partition(PartitionBuilder(1, 3).add(1.0f, dps, 0.5).add(-1.0f, dps, -1.0).build());
  const std::size_t table = layout::kHeaderBytes;
  const std::size_t dual = good.size() - 2 * sizeof(double);

  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{0}, std::size_t{10}, good.size() - 1}) {
      std::vector<std::byte> b(good.begin(), good.begin() + cut);
      CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
    }
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(std::byte{0});
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("bad magic") {
    auto b = good;
    b[0] = std::byte{'X'};
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("bad version") {
    auto b = good;
    poke<std::uint16_t>(b, 4, 9);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("label outside +-1") {
    auto b = good;
    poke<float>(b, table + 8, 0.0f);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("alpha times label above one") {
    auto b = good;
    poke<double>(b, dual, 1.5);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("alpha with the wrong sign") {
    auto b = good;
    poke<double>(b, dual + 8, 0.25);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("NaN alpha") {
    auto b = good;
    poke<double>(b, dual, std::nan(""));
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("overlapping datapoint runs") {
    auto b = good;
    poke<std::uint64_t>(b, table + sizeof(ExampleEntry) + 16, peek<std::uint64_t>(b, table + 16));
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("run longer than its region") {
    auto b = good;
    poke<std::uint64_t>(b, table + sizeof(ExampleEntry), 1000);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("feature out of range") {
    auto b = good;
    poke<std::uint32_t>(b, table + 2 * sizeof(ExampleEntry), 3);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("huge example count") {
    auto b = good;
    poke<std::uint64_t>(b, 16, std::uint64_t{1} << 62);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
  SUBCASE("region lengths that disagree with the total") {
    auto b = good;
    poke<std::uint64_t>(b, 56, good.size() + 8);
    CHECK_THROWS_AS(decode_partition(b), MalformedBuffer);
  }
}

TEST_CASE("random byte flips never crash the decoder") {
  gen::Rng rng(13);
  for (int t = 0; t < 500; ++t) {
    auto img = encode_partition(gen::partition(rng, 0, 6, 8));
    const auto flips = rng.index(1, 4);
    for (std::size_t k = 0; k < flips; ++k) img[rng.index(0, img.size() - 1)] ^= std::byte(rng.index(1, 255));
    try {
      const auto p = decode_partition(img);
      for (std::size_t i = 0; i < p.num_examples(); ++i) CHECK(in_dual_box(p.alphas()[i], p.label(i)));
    } catch (const MalformedBuffer&) {
    }
  }
}

TEST_CASE("builder enforces the buffer invariants") {
  const Datapoint dp{4, 1.0f};
  CHECK_THROWS_AS(PartitionBuilder(0, 4).add(1.0f, std::span(&dp, 1)), MalformedBuffer);
  CHECK_THROWS_AS(PartitionBuilder(0, 8).add(0.5f, std::span(&dp, 1)), MalformedBuffer);
  CHECK_THROWS_AS(PartitionBuilder(0, 8).add(-1.0f, std::span(&dp, 1), 0.5), MalformedBuffer);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_sigma(16) == 16.0);
  c.sigma_prime = 2.0;
  CHECK(c.effective_sigma(16) == 2.0);
  c.lambda = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
