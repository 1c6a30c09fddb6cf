#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "htpc/rng.hpp"

using namespace htpc;

TEST_CASE("philox 4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  auto out = philox::block({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  out = philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu});
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  out = philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u});
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("philox block64 is a pure function of (seed, counter, stream)") {
  const auto a = philox::block64(12345, 678, 0);
  const auto b = philox::block64(12345, 678, 0);
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(a != philox::block64(12345, 679, 0));
  CHECK(a != philox::block64(12346, 678, 0));
  CHECK(a != philox::block64(12345, 678, 1));
}

TEST_CASE("derived seeds differ across indices") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(0, 0) != 0);
}

TEST_CASE("splitmix64 stream is deterministic and roughly uniform") {
  SplitMix64 rng(99);
  SplitMix64 rng2(99);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    CHECK(rng() == rng2());
    mean += rng.uniform01();
    rng2.uniform01();
  }
  mean /= 100000.0;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("poisson cdf table matches closed-form moments") {
  for (double mean : {0.3, 2.0, 17.5, 400.0}) {
    const auto sampler = DiscreteCdfSampler::poisson(mean);
    CHECK(sampler.mean() == doctest::Approx(mean).epsilon(1e-9));

    SplitMix64 rng(7);
    const int trials = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < trials; ++i) {
      const double x = static_cast<double>(sampler.sample(rng));
      sum += x;
      sum2 += x * x;
    }
    const double m = sum / trials;
    const double var = sum2 / trials - m * m;
    const double se = std::sqrt(mean / trials);
    CHECK(std::abs(m - mean) < 4.0 * se + 1e-9);
    CHECK(var == doctest::Approx(mean).epsilon(0.05));
  }
}

TEST_CASE("poisson degenerate at mean zero") {
  const auto sampler = DiscreteCdfSampler::poisson(0.0);
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) CHECK(sampler.sample(rng) == 0);
}

TEST_CASE("binomial cdf table matches closed-form moments") {
  struct Case {
    std::int64_t n;
    double p;
  };
  for (const Case c : {Case{10, 0.5}, Case{10000, 2e-4}, Case{500, 0.9}}) {
    const double mean = static_cast<double>(c.n) * c.p;
    const double var_expected = mean * (1.0 - c.p);
    const auto sampler = DiscreteCdfSampler::binomial(c.n, c.p);
    CHECK(sampler.mean() == doctest::Approx(mean).epsilon(1e-9));
    CHECK(sampler.support_min() >= 0);
    CHECK(sampler.support_max() <= c.n);

    SplitMix64 rng(11);
    const int trials = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < trials; ++i) {
      const double x = static_cast<double>(sampler.sample(rng));
      sum += x;
      sum2 += x * x;
    }
    const double m = sum / trials;
    const double var = sum2 / trials - m * m;
    CHECK(std::abs(m - mean) < 4.0 * std::sqrt(var_expected / trials) + 1e-9);
    CHECK(var == doctest::Approx(var_expected).epsilon(0.05));
  }
}

TEST_CASE("binomial degenerate ends") {
  SplitMix64 rng(3);
  const auto zero = DiscreteCdfSampler::binomial(10, 0.0);
  const auto full = DiscreteCdfSampler::binomial(10, 1.0);
  for (int i = 0; i < 50; ++i) {
    CHECK(zero.sample(rng) == 0);
    CHECK(full.sample(rng) == 10);
  }
}
