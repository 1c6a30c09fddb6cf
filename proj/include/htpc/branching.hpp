#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "htpc/rng.hpp"

namespace htpc {

// Offspring law of the multitype process: a type-i parent bears, for each
// j != i, Binomial(round(a_j n), lambda/n) (finite-n) or Poisson(lambda a_j)
// (limit) children of type j and none of its own type. With
// special_first_step the first individual retired bears children of all d
// types, mirroring the start vertex of the cluster exploration.
class OffspringLaw {
 public:
  enum class Kind { binomial, poisson };

  static OffspringLaw poisson(double lambda,
                              const Eigen::Ref<const Eigen::VectorXd>& a,
                              bool special_first_step = false);
  static OffspringLaw binomial(double lambda,
                               const Eigen::Ref<const Eigen::VectorXd>& a,
                               long n, bool special_first_step = false);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& a() const { return a_; }
  long n() const { return n_; }
  int types() const { return static_cast<int>(a_.size()); }
  bool special_first_step() const { return special_first_step_; }
  OffspringLaw with_special_first_step(bool value) const;

  // Exact mean number of type-j children of a non-first parent (respects
  // the binomial rounding of a_j n).
  double mean_offspring(int j) const;

  std::int64_t draw_children(int j, SplitMix64& rng) const {
    return samplers_[j].sample(rng);
  }

 private:
  OffspringLaw(Kind kind, double lambda, Eigen::VectorXd a, long n,
               bool special_first_step);

  Kind kind_;
  double lambda_;
  Eigen::VectorXd a_;
  long n_;
  bool special_first_step_;
  std::vector<DiscreteCdfSampler> samplers_;  // one per child type
};

// Random-walk state of the exploration: active counts by type; one active
// individual is retired per step.
struct WalkState {
  std::vector<std::int64_t> s;       // active individuals by type
  std::int64_t t = 0;                // steps taken
  std::int64_t total_retired = 0;    // individuals retired so far
  bool first_step_pending = false;   // special first draw not yet taken

  std::int64_t active_total() const {
    std::int64_t sum = 0;
    for (std::int64_t v : s) sum += v;
    return sum;
  }
  // Total progeny so far: everyone active plus everyone retired.
  std::int64_t total_progeny() const { return active_total() + total_retired; }
  bool dead() const { return active_total() == 0; }
};

WalkState make_walk(const OffspringLaw& law, const std::vector<std::int64_t>& start);
WalkState make_walk_from_type(const OffspringLaw& law, int type);  // 1-based

// One step: pick the retiring type with probability s_i/||s||_1, add its
// offspring, retire it. Throws on a dead state.
void walk_step(WalkState& state, const OffspringLaw& law, SplitMix64& rng);

struct ProgenyResult {
  std::int64_t size = 0;  // total progeny at death; == cap when exceeded
  bool exceeded = false;  // reached the cap; reported distinctly, never an error
};

// Runs walk_step until death or total progeny >= cap. Requires
// cap >= ||start||_1.
ProgenyResult total_progeny(const OffspringLaw& law,
                            const std::vector<std::int64_t>& start,
                            std::int64_t cap, SplitMix64& rng);

// Start of a survival experiment: a single ancestor of a fixed type, or the
// special first step (all d child types), which stands in for one of the
// (d-1) independent copies whose product gives q^(d-1).
struct StartSpec {
  bool special = false;
  int type = 1;  // 1-based, used when !special

  static StartSpec of_type(int type) { return {false, type}; }
  static StartSpec special_start() { return {true, 1}; }
};

struct SurvivalEstimate {
  double probability = 0.0;  // fraction of trials that reached the cap
  double std_error = 0.0;
  std::int64_t survived = 0;
  std::int64_t trials = 0;
};

// Monte Carlo over independent trials; trial k uses the stream derived from
// (seed, k), so the aggregate is deterministic for any thread count.
// "Survived" means the trial hit the cap; the truncation overestimates
// survival by at most P(die after cap).
SurvivalEstimate survival_probability(const OffspringLaw& law, StartSpec start,
                                      std::int64_t trials, std::int64_t cap,
                                      std::uint64_t seed, int threads = 0);

// Per-trial progeny sizes (size or cap with exceeded flag), deterministic per
// (seed, trial index); used by the CLI's CSV output and the tail tests.
std::vector<ProgenyResult> progeny_samples(const OffspringLaw& law,
                                           StartSpec start, std::int64_t trials,
                                           std::int64_t cap, std::uint64_t seed,
                                           int threads = 0);

}  // namespace htpc
