#include "branchdepth/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <set>

using branchdepth::CounterRng;

TEST_SUITE("rng") {

TEST_CASE("draws are a pure function of seed, stream and counter") {
  CounterRng a(42, 7);
  CounterRng b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c(42, 8);
  CounterRng d(43, 7);
  CHECK(CounterRng(42, 7).next_u64() != c.next_u64());
  CHECK(CounterRng(42, 7).next_u64() != d.next_u64());
}

TEST_CASE("start_counter offsets into the same sequence") {
  CounterRng base(9, 1);
  std::uint64_t fifth = 0;
  for (int i = 0; i < 6; ++i) fifth = base.next_u64();
  CounterRng jump(9, 1, 5);
  CHECK(jump.next_u64() == fifth);
}

TEST_CASE("next_double lies in [0, 1) and is roughly uniform") {
  CounterRng rng(1, 0);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.02);
}

TEST_CASE("uniform maps into the requested interval") {
  CounterRng rng(5, 2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-3.0, 9.0);
    CHECK(v >= -3.0);
    CHECK(v < 9.0);
  }
}

TEST_CASE("next_below stays under the bound and hits distinct values") {
  CounterRng rng(11, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = rng.next_below(10);
    REQUIRE(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("gaussian has roughly unit variance and zero mean") {
  CounterRng rng(123, 4);
  const int n = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("hash3 separates nearby keys") {
  const std::uint64_t h = CounterRng::hash3(1, 2, 3);
  CHECK(h != CounterRng::hash3(1, 2, 4));
  CHECK(h != CounterRng::hash3(1, 3, 3));
  CHECK(h != CounterRng::hash3(2, 2, 3));
  CHECK(CounterRng::hash3(0, 0, 0) != CounterRng::hash3(0, 0, 1));
}

}  // TEST_SUITE
