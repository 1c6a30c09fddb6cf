#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "htpc/branching.hpp"
#include "htpc/components.hpp"
#include "htpc/theory.hpp"
#include "oracles.hpp"

using namespace htpc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("walk with zero intensity dies in exactly ||s0||_1 steps") {
  for (const auto& law : {OffspringLaw::poisson(0.0, vec({1, 1})),
                          OffspringLaw::binomial(0.0, vec({1, 1}), 50)}) {
    SplitMix64 rng(1);
    WalkState state = make_walk(law, {2, 3});
    while (!state.dead()) walk_step(state, law, rng);
    CHECK(state.t == 5);
    CHECK(state.total_retired == 5);
  }
}

TEST_CASE("own-type births are excluded") {
  const OffspringLaw law = OffspringLaw::poisson(3.0, vec({1, 1}));
  SplitMix64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    WalkState state = make_walk_from_type(law, 1);
    walk_step(state, law, rng);
    CHECK(state.s[0] == 0);  // the type-1 parent bears only type-2 children
    CHECK(state.s[1] >= 0);
  }
}

TEST_CASE("special first step bears all types, then reverts") {
  const OffspringLaw law = OffspringLaw::poisson(5.0, vec({1, 1}), true);
  SplitMix64 rng(3);
  int saw_own_type = 0;
  for (int trial = 0; trial < 300; ++trial) {
    WalkState state = make_walk_from_type(law, 1);
    CHECK(state.first_step_pending);
    walk_step(state, law, rng);
    saw_own_type += state.s[0] > 0;
    CHECK(!state.first_step_pending);
  }
  CHECK(saw_own_type > 250);  // Poisson(5) of its own type is rarely zero
}

TEST_CASE("walk_step on a dead state throws") {
  const OffspringLaw law = OffspringLaw::poisson(1.0, vec({1, 1}));
  WalkState state = make_walk(law, {0, 0});
  SplitMix64 rng(4);
  CHECK_THROWS_AS(walk_step(state, law, rng), std::logic_error);
}

TEST_CASE("mean increment of <S, mu> per step is (rho - 1) mu_i") {
  const Eigen::VectorXd a = vec({1.5, 1});
  const double lambda = 0.6;
  const PerronData pd = perron(lambda, a);
  const OffspringLaw law = OffspringLaw::poisson(lambda, a);
  SplitMix64 rng(5);
  const int trials = 100000;
  for (int type = 1; type <= 2; ++type) {
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < trials; ++k) {
      WalkState state = make_walk_from_type(law, type);  // forces j_t = type
      const double before = pd.mu[type - 1];
      walk_step(state, law, rng);
      double after = 0.0;
      for (int j = 0; j < 2; ++j)
        after += pd.mu[j] * static_cast<double>(state.s[j]);
      const double inc = after - before;
      sum += inc;
      sum2 += inc * inc;
    }
    const double mean = sum / trials;
    const double sd = std::sqrt(sum2 / trials - mean * mean);
    const double expected = (pd.rho - 1.0) * pd.mu[type - 1];
    CHECK(std::abs(mean - expected) <= 3.0 * sd / std::sqrt(double(trials)));
  }
}

TEST_CASE("empirical mean offspring matrix matches the law's means") {
  const Eigen::VectorXd a = vec({2, 1});
  for (const auto& law : {OffspringLaw::poisson(0.8, a),
                          OffspringLaw::binomial(0.8, a, 200)}) {
    SplitMix64 rng(6);
    const int trials = 100000;
    for (int type = 1; type <= 2; ++type) {
      Eigen::Vector2d sum = Eigen::Vector2d::Zero();
      Eigen::Vector2d sum2 = Eigen::Vector2d::Zero();
      for (int k = 0; k < trials; ++k) {
        WalkState state = make_walk_from_type(law, type);
        walk_step(state, law, rng);
        for (int j = 0; j < 2; ++j) {
          sum[j] += static_cast<double>(state.s[j]);
          sum2[j] += static_cast<double>(state.s[j]) * state.s[j];
        }
      }
      for (int j = 0; j < 2; ++j) {
        if (j == type - 1) {
          CHECK(sum[j] == 0.0);
          continue;
        }
        const double mean = sum[j] / trials;
        const double sd = std::sqrt(sum2[j] / trials - mean * mean);
        CHECK(std::abs(mean - law.mean_offspring(j)) <=
              3.0 * sd / std::sqrt(double(trials)));
      }
    }
  }
}

TEST_CASE("total progeny of a lone sterile ancestor is one") {
  const OffspringLaw law = OffspringLaw::poisson(0.0, vec({1, 1}));
  SplitMix64 rng(7);
  const ProgenyResult r = total_progeny(law, {1, 0}, 100, rng);
  CHECK(!r.exceeded);
  CHECK(r.size == 1);
}

TEST_CASE("cap is a value, not an error, and respects the precondition") {
  const OffspringLaw law = OffspringLaw::poisson(2.0, vec({1, 1}));
  SplitMix64 rng(8);
  CHECK_THROWS_AS(total_progeny(law, {3, 0}, 2, rng), std::invalid_argument);
  int exceeded = 0;
  for (int k = 0; k < 200; ++k) {
    const ProgenyResult r = total_progeny(law, {1, 0}, 50, rng);
    if (r.exceeded) {
      ++exceeded;
      CHECK(r.size == 50);
    } else {
      CHECK(r.size < 50);
    }
  }
  CHECK(exceeded > 100);  // supercritical: most runs hit the cap
}

TEST_CASE("subcritical mean progeny is stable across caps") {
  const OffspringLaw law = OffspringLaw::poisson(0.6, vec({1, 1}));
  const auto sizes_at = [&](std::int64_t cap, std::uint64_t seed) {
    double sum = 0.0;
    const auto samples =
        progeny_samples(law, StartSpec::of_type(1), 20000, cap, seed, 1);
    for (const auto& r : samples) sum += static_cast<double>(r.size);
    return sum / static_cast<double>(samples.size());
  };
  const double m3 = sizes_at(1000, 11);
  const double m4 = sizes_at(10000, 12);
  // mean T = 1/(1 - rho) = 2.5; sd(T) ~ few, se ~ 0.03
  CHECK(m3 == doctest::Approx(2.5).epsilon(0.05));
  CHECK(std::abs(m3 - m4) < 0.1);
}

TEST_CASE("supercritical cap-hit fraction matches 1 - q_1") {
  const Eigen::VectorXd a = vec({1, 1});
  const double lambda = 2.0;
  const double q1 = extinction(lambda, a).q_vec[0];
  const OffspringLaw law = OffspringLaw::poisson(lambda, a);
  const SurvivalEstimate est = survival_probability(
      law, StartSpec::of_type(1), 20000, 100000, 21, 0);
  CHECK(std::abs(est.probability - (1.0 - q1)) < 0.01);
}

TEST_CASE("batched and pure-walk progeny agree in distribution") {
  // Same law, same start; one path through total_progeny (pure walk), one
  // through progeny_samples (walk + generation batching). Compare means and
  // the cap-hit rate.
  const OffspringLaw law = OffspringLaw::poisson(1.4, vec({1, 1}));
  const std::int64_t cap = 2000;
  const int trials = 20000;

  double walk_sum = 0.0, walk_sum2 = 0.0;
  int walk_hits = 0;
  for (int k = 0; k < trials; ++k) {
    SplitMix64 rng(derive_seed(777, static_cast<std::uint64_t>(k)) ^ 1);
    const ProgenyResult r = total_progeny(law, {1, 0}, cap, rng);
    walk_sum += static_cast<double>(r.size);
    walk_sum2 += static_cast<double>(r.size) * r.size;
    walk_hits += r.exceeded;
  }
  const auto samples =
      progeny_samples(law, StartSpec::of_type(1), trials, cap, 778, 0);
  double batch_sum = 0.0;
  int batch_hits = 0;
  for (const auto& r : samples) {
    batch_sum += static_cast<double>(r.size);
    batch_hits += r.exceeded;
  }

  const double walk_mean = walk_sum / trials;
  const double batch_mean = batch_sum / trials;
  const double walk_sd = std::sqrt(walk_sum2 / trials - walk_mean * walk_mean);
  CHECK(std::abs(walk_mean - batch_mean) <=
        4.0 * walk_sd * std::sqrt(2.0 / trials));
  const double hit_rate_w = static_cast<double>(walk_hits) / trials;
  const double hit_rate_b = static_cast<double>(batch_hits) / trials;
  const double se =
      std::sqrt(2.0 * hit_rate_w * (1.0 - hit_rate_w) / trials) + 1e-9;
  CHECK(std::abs(hit_rate_w - hit_rate_b) <= 4.0 * se);
}

TEST_CASE("survival is near zero below criticality") {
  const OffspringLaw law = OffspringLaw::poisson(0.5, vec({1, 1}));
  const SurvivalEstimate est =
      survival_probability(law, StartSpec::of_type(1), 20000, 10000, 31, 0);
  CHECK(est.probability < 3.0 * std::sqrt(0.25 / 20000.0) + 1e-3);
}

TEST_CASE("special start estimates 1 - q, tying the product identity") {
  const Eigen::VectorXd a = vec({1, 1});
  const double q = extinction(2.0, a).q;  // = (q1 q2)^{1/(d-1)}
  const OffspringLaw law = OffspringLaw::poisson(2.0, a);
  const SurvivalEstimate est = survival_probability(
      law, StartSpec::special_start(), 20000, 100000, 41, 0);
  CHECK(std::abs(est.probability - (1.0 - q)) < 0.012);
}

TEST_CASE("binomial at n = 10^4 approaches the poisson limit") {
  const Eigen::VectorXd a = vec({1, 1});
  const OffspringLaw poisson = OffspringLaw::poisson(2.0, a);
  const OffspringLaw binomial = OffspringLaw::binomial(2.0, a, 10000);
  const SurvivalEstimate est_p = survival_probability(
      poisson, StartSpec::of_type(1), 40000, 100000, 51, 0);
  const SurvivalEstimate est_b = survival_probability(
      binomial, StartSpec::of_type(1), 40000, 100000, 52, 0);
  CHECK(std::abs(est_p.probability - est_b.probability) < 0.01);
}

TEST_CASE("cluster sizes are stochastically dominated by the binomial walk") {
  // Matched seeds: seed k drives both the torus sample and the walk trial.
  // Occupancy is independent across sites, so conditioning on the start
  // vertex being occupied just means forcing its bit on.
  const TorusSpec spec = make_spec(2, vec({1, 1}), 100);
  const double lambda = 0.7;
  const double p = lambda_to_p(spec, lambda);
  const OffspringLaw law = OffspringLaw::binomial(lambda, spec.a, spec.n);

  std::vector<double> cluster_sizes, walk_sizes;
  const VertexId v0 = index_of(spec, {50, 50});
  for (std::uint64_t seed = 0; seed < 1500; ++seed) {
    SiteConfig config = sample(spec, p, seed, 1);
    if (!config.occupied(v0)) {
      config.words[v0 >> 6] |= 1ull << (v0 & 63);
      ++config.occupied_count;
    }
    cluster_sizes.push_back(
        static_cast<double>(cluster_discovery(config, v0).size()));
    SplitMix64 rng(derive_seed(9000, seed));
    walk_sizes.push_back(static_cast<double>(
        total_progeny(law.with_special_first_step(true), {1, 0}, 100000, rng)
            .size));
  }
  REQUIRE(cluster_sizes.size() == 1500);

  const auto mean = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  };
  const auto quantile = [](std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    return xs[static_cast<std::size_t>(q * (xs.size() - 1))];
  };
  const double se =
      std::sqrt(2.0 * 30.0 / static_cast<double>(cluster_sizes.size()));
  CHECK(mean(cluster_sizes) <= mean(walk_sizes) + 3.0 * se);
  CHECK(quantile(cluster_sizes, 0.5) <= quantile(walk_sizes, 0.5) + 1.0);
  CHECK(quantile(cluster_sizes, 0.9) <= quantile(walk_sizes, 0.9) + 1.0);
  CHECK(quantile(cluster_sizes, 0.99) <= quantile(walk_sizes, 0.99) + 2.0);
}

TEST_CASE("subcritical log-survival decays at least at rate alpha") {
  const Eigen::VectorXd a = vec({1, 1});
  const double lambda = 0.5;
  const TailConstants tc = tail_constants(lambda, a);
  const OffspringLaw law = OffspringLaw::poisson(lambda, a);
  const auto samples =
      progeny_samples(law, StartSpec::of_type(1), 200000, 100000, 61, 0);

  std::vector<std::int64_t> survivors(200, 0);
  for (const auto& r : samples)
    for (std::int64_t x = 0; x < std::min<std::int64_t>(r.size, 200); ++x)
      ++survivors[x];  // survivors[x] = #{T > x}

  // Least-squares slope of log P(T > x) where counts are still solid.
  std::vector<double> xs, ys;
  for (std::int64_t x = 10; x < 200; ++x) {
    if (survivors[x] < 50) break;
    xs.push_back(static_cast<double>(x));
    ys.push_back(std::log(static_cast<double>(survivors[x]) /
                          static_cast<double>(samples.size())));
  }
  REQUIRE(xs.size() >= 10);
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope <= -tc.alpha + 0.05);

  // And the whole curve sits under the analytic envelope with 20% slack.
  for (std::size_t x = 0; x < xs.size(); ++x) {
    const double bound = tc.C * std::exp(-tc.alpha * xs[x]) * 1.2;
    CHECK(std::exp(ys[x]) <= bound);
  }
}
