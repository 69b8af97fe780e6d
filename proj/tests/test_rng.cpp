#include <doctest.h>

#include <cmath>

#include "srde/rng.hpp"

using namespace srde;

TEST_CASE("counter rng is a pure function of its address") {
  CHECK(rng::normal(42, 7, 3) == rng::normal(42, 7, 3));
  CHECK(rng::uniform(42, 7, 3) == rng::uniform(42, 7, 3));
  CHECK(rng::normal(42, 7, 3) != rng::normal(42, 7, 4));
  CHECK(rng::normal(42, 8, 3) != rng::normal(42, 7, 3));
  CHECK(rng::normal(43, 7, 3) != rng::normal(42, 7, 3));
}

TEST_CASE("derive_key separates cells and trials") {
  CHECK(rng::derive_key(1, 0, 0) != rng::derive_key(1, 0, 1));
  CHECK(rng::derive_key(1, 0, 0) != rng::derive_key(1, 1, 0));
  CHECK(rng::derive_key(1, 0, 0) != rng::derive_key(2, 0, 0));
  CHECK(rng::derive_key(1, 2, 3) == rng::derive_key(1, 2, 3));
}

TEST_CASE("uniform values live in (0,1]") {
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    const double u = rng::uniform(99, i, 0);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("normal moments match over 1e5 draws") {
  const long n = 100'000;
  double sum = 0, sum2 = 0;
  for (long i = 0; i < n; ++i) {
    const double z = rng::normal(2024, std::uint64_t(i), 0);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  // mean within 4 standard errors of 0, variance within 5% of 1
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}
