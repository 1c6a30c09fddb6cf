#include "htpc/branching.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "htpc/sampler.hpp"

namespace htpc {

OffspringLaw::OffspringLaw(Kind kind, double lambda, Eigen::VectorXd a, long n,
                           bool special_first_step)
    : kind_(kind),
      lambda_(lambda),
      a_(std::move(a)),
      n_(n),
      special_first_step_(special_first_step) {
  if (a_.size() < 1) throw std::invalid_argument("offspring law needs d >= 1");
  if (!(lambda_ >= 0.0))
    throw std::invalid_argument("offspring law needs lambda >= 0");
  for (Eigen::Index j = 0; j < a_.size(); ++j)
    if (!(a_[j] > 0.0))
      throw std::invalid_argument("aspect ratios must be positive");

  samplers_.reserve(a_.size());
  for (Eigen::Index j = 0; j < a_.size(); ++j) {
    if (kind_ == Kind::poisson) {
      samplers_.push_back(DiscreteCdfSampler::poisson(lambda_ * a_[j]));
    } else {
      const std::int64_t trials = std::llround(a_[j] * static_cast<double>(n_));
      samplers_.push_back(DiscreteCdfSampler::binomial(
          std::max<std::int64_t>(trials, 1), lambda_ / static_cast<double>(n_)));
    }
  }
}

OffspringLaw OffspringLaw::poisson(double lambda,
                                   const Eigen::Ref<const Eigen::VectorXd>& a,
                                   bool special_first_step) {
  return OffspringLaw(Kind::poisson, lambda, a, 0, special_first_step);
}

OffspringLaw OffspringLaw::binomial(double lambda,
                                    const Eigen::Ref<const Eigen::VectorXd>& a,
                                    long n, bool special_first_step) {
  if (n < 1) throw std::invalid_argument("binomial law needs n >= 1");
  if (lambda / static_cast<double>(n) > 1.0)
    throw std::invalid_argument("binomial law needs lambda / n <= 1");
  return OffspringLaw(Kind::binomial, lambda, a, n, special_first_step);
}

OffspringLaw OffspringLaw::with_special_first_step(bool value) const {
  OffspringLaw law = *this;
  law.special_first_step_ = value;
  return law;
}

double OffspringLaw::mean_offspring(int j) const {
  if (kind_ == Kind::poisson) return lambda_ * a_[j];
  const std::int64_t trials =
      std::max<std::int64_t>(std::llround(a_[j] * static_cast<double>(n_)), 1);
  return static_cast<double>(trials) * lambda_ / static_cast<double>(n_);
}

WalkState make_walk(const OffspringLaw& law,
                    const std::vector<std::int64_t>& start) {
  if (static_cast<int>(start.size()) != law.types())
    throw std::invalid_argument("start vector size does not match type count");
  for (std::int64_t v : start)
    if (v < 0) throw std::invalid_argument("start counts must be >= 0");
  WalkState state;
  state.s = start;
  state.first_step_pending = law.special_first_step();
  return state;
}

WalkState make_walk_from_type(const OffspringLaw& law, int type) {
  if (type < 1 || type > law.types())
    throw std::invalid_argument("start type outside [1, d]");
  std::vector<std::int64_t> start(law.types(), 0);
  start[type - 1] = 1;
  return make_walk(law, start);
}

void walk_step(WalkState& state, const OffspringLaw& law, SplitMix64& rng) {
  const std::int64_t total = state.active_total();
  if (total == 0) throw std::logic_error("walk_step on a dead state");

  // Retire a uniformly chosen active individual: type i w.p. s_i / total.
  int type = 0;
  {
    const std::uint64_t r = rng();
    std::uint64_t target = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(r) * static_cast<unsigned __int128>(total)) >> 64);
    std::int64_t cum = 0;
    for (int i = 0; i < law.types(); ++i) {
      cum += state.s[i];
      if (static_cast<std::int64_t>(target) < cum) {
        type = i;
        break;
      }
    }
  }

  const bool all_types = state.first_step_pending;
  state.first_step_pending = false;
  for (int j = 0; j < law.types(); ++j) {
    if (j == type && !all_types) continue;
    state.s[j] += law.draw_children(j, rng);
  }
  --state.s[type];
  ++state.t;
  ++state.total_retired;
}

ProgenyResult total_progeny(const OffspringLaw& law,
                            const std::vector<std::int64_t>& start,
                            std::int64_t cap, SplitMix64& rng) {
  WalkState state = make_walk(law, start);
  if (cap < state.active_total())
    throw std::invalid_argument("cap must be >= the initial active count");
  while (!state.dead()) {
    if (state.total_progeny() >= cap) return {cap, true};
    walk_step(state, law, rng);
  }
  return {state.total_retired, false};
}

namespace {

std::vector<std::int64_t> start_vector(const OffspringLaw& law, StartSpec start) {
  std::vector<std::int64_t> s(law.types(), 0);
  if (start.special) {
    s[0] = 1;  // the ancestor's own type is irrelevant: it bears all types
  } else {
    if (start.type < 1 || start.type > law.types())
      throw std::invalid_argument("start type outside [1, d]");
    s[start.type - 1] = 1;
  }
  return s;
}

// Children of `parents` type-i individuals for child type j in one draw,
// using the exact sum identities: sums of iid Poisson are Poisson, sums of
// iid binomials with a common p are binomial.
std::int64_t draw_children_bulk(const OffspringLaw& law, int j,
                                std::int64_t parents, SplitMix64& rng) {
  if (parents == 0) return 0;
  if (parents == 1) return law.draw_children(j, rng);
  if (law.kind() == OffspringLaw::Kind::poisson) {
    std::poisson_distribution<std::int64_t> dist(
        static_cast<double>(parents) * law.mean_offspring(j));
    return dist(rng);
  }
  const std::int64_t trials = std::max<std::int64_t>(
      std::llround(law.a()[j] * static_cast<double>(law.n())), 1);
  std::binomial_distribution<std::int64_t> dist(
      parents * trials, law.lambda() / static_cast<double>(law.n()));
  return dist(rng);
}

// Total progeny with identical law to the pure walk but far cheaper in the
// supercritical regime: per-step walk while the active population is small
// (where extinction is decided), then whole generations at once. T is the
// size of the family forest, which does not depend on exploration order.
ProgenyResult total_progeny_batched(const OffspringLaw& law,
                                    const std::vector<std::int64_t>& start,
                                    std::int64_t cap, SplitMix64& rng) {
  constexpr std::int64_t kBatchThreshold = 64;
  WalkState state = make_walk(law, start);
  if (cap < state.active_total())
    throw std::invalid_argument("cap must be >= the initial active count");

  while (!state.dead()) {
    if (state.total_progeny() >= cap) return {cap, true};
    if (state.active_total() >= kBatchThreshold) break;
    walk_step(state, law, rng);
  }
  if (state.dead()) return {state.total_retired, false};

  // The subtrees below the current actives are independent; process them
  // generation by generation.
  std::vector<std::int64_t> gen = state.s;
  std::vector<std::int64_t> next(law.types(), 0);
  std::int64_t total = state.total_progeny();
  for (;;) {
    if (total >= cap) return {cap, true};
    std::fill(next.begin(), next.end(), 0);
    for (int i = 0; i < law.types(); ++i) {
      if (gen[i] == 0) continue;
      for (int j = 0; j < law.types(); ++j) {
        if (j == i) continue;
        next[j] += draw_children_bulk(law, j, gen[i], rng);
      }
    }
    std::int64_t born = 0;
    for (std::int64_t v : next) born += v;
    if (born == 0) return {total, false};
    total += born;
    gen.swap(next);
  }
}

}  // namespace

std::vector<ProgenyResult> progeny_samples(const OffspringLaw& law,
                                           StartSpec start, std::int64_t trials,
                                           std::int64_t cap, std::uint64_t seed,
                                           int threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  // The start argument is authoritative for the first-step behavior.
  const OffspringLaw effective = law.with_special_first_step(start.special);
  const std::vector<std::int64_t> s0 = start_vector(effective, start);

  std::vector<ProgenyResult> results(trials);
  const int nthreads =
      static_cast<int>(std::min<std::int64_t>(effective_threads(threads), trials));
  auto worker = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t k = lo; k < hi; ++k) {
      SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      results[k] = total_progeny_batched(effective, s0, cap, rng);
    }
  };
  if (nthreads <= 1) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (trials + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::int64_t lo = t * chunk;
      const std::int64_t hi = std::min<std::int64_t>(lo + chunk, trials);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

SurvivalEstimate survival_probability(const OffspringLaw& law, StartSpec start,
                                      std::int64_t trials, std::int64_t cap,
                                      std::uint64_t seed, int threads) {
  const std::vector<ProgenyResult> samples =
      progeny_samples(law, start, trials, cap, seed, threads);
  SurvivalEstimate est;
  est.trials = trials;
  for (const ProgenyResult& r : samples) est.survived += r.exceeded;
  est.probability =
      static_cast<double>(est.survived) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.probability * (1.0 - est.probability) /
                            static_cast<double>(trials));
  return est;
}

}  // namespace htpc
