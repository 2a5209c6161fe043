#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crane/rng.hpp"

using crane::Rng;

TEST_CASE("identical seeds give identical streams") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(1234), d(1235);
  bool all_equal = true;
  for (int i = 0; i < 10; ++i) all_equal &= (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform01 stays in [0, 1) and matches uniform moments") {
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sq += u * u;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.05));
}

TEST_CASE("uniform respects interval bounds") {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    double v = rng.uniform(-2.5, 1.5);
    CHECK(v >= -2.5);
    CHECK(v < 1.5);
  }
}

TEST_CASE("normal sample moments") {
  Rng rng(21);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform_index covers the range without bias") {
  Rng rng(5);
  const std::uint64_t n = 10;
  std::vector<int> counts(n, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_index(n)];
  const double p = 1.0 / double(n);
  const double sigma = std::sqrt(p * (1 - p) / draws);
  for (std::uint64_t k = 0; k < n; ++k) {
    double freq = counts[k] / double(draws);
    CHECK(std::abs(freq - p) < 5.0 * sigma);
  }
  CHECK(rng.uniform_index(1) == 0);
}

TEST_CASE("derive_seed separates components and stays stable") {
  auto a = crane::derive_seed(7, "env");
  auto b = crane::derive_seed(7, "noise");
  auto c = crane::derive_seed(8, "env");
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a == crane::derive_seed(7, "env"));
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng r1(3), r2(3);
  crane::shuffle(v, r1);
  crane::shuffle(w, r2);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}
