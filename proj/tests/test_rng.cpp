#include <doctest.h>

#include "cxr/rng.hpp"

using namespace cxr;

TEST_CASE("same seed gives the same stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("uniform stays inside its interval") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-3.5, 2.25);
    CHECK(v >= -3.5);
    CHECK(v < 2.25);
  }
}

TEST_CASE("below is bounded and hits every residue") {
  Rng rng(99);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  for (int count : seen) CHECK(count > 0);
}

TEST_CASE("shuffle permutes without loss") {
  Rng rng(5);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto orig = v;
  rng.shuffle(v);
  std::sort(v.begin(), v.end());
  CHECK(v == orig);
}

TEST_CASE("sample_without_replacement returns distinct sorted indices") {
  Rng rng(11);
  auto s = rng.sample_without_replacement(9, 4);
  REQUIRE(s.size() == 4);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(s[i] > s[i - 1]);
    CHECK(s[i] < 9);
  }
}
