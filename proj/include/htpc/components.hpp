#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "htpc/sampler.hpp"

namespace htpc {

struct ComponentStats {
  std::vector<std::int64_t> component_sizes;  // descending
  std::int64_t largest = 0;
  std::int64_t second_largest = 0;  // 0 when fewer than two components
  std::int64_t isolated_count = 0;  // size-1 components
  std::int64_t component_count = 0;
  std::int64_t occupied_count = 0;
  bool is_connected = true;  // component_count <= 1; vacuously true when empty

  std::map<std::int64_t, std::int64_t> size_histogram() const;
};

// Exact component census of the occupied-site subgraph. Occupied vertices are
// compacted to dense ids (sorted-array index when occupied < |V|/8, direct
// table otherwise), then every axis line is swept once, chaining consecutive
// occupied vertices in a disjoint-set: each line is a clique, so a chain of
// unions is enough. O(d |V| alpha).
ComponentStats connected_components(const SiteConfig& config);

// The exploration that reveals C_v: keep removed / active / unseen sets, pop
// the lexicographically smallest active vertex, activate its occupied unseen
// neighbors, drop its whole neighborhood from unseen, retire it. Exposed as a
// class so traces can be inspected mid-run.
class ClusterDiscovery {
 public:
  // modified == true additionally removes, each step, the common unseen
  // neighbors of every pair of distinct active vertices before they can be
  // observed; the discovered set is then a subset of C_v.
  ClusterDiscovery(const SiteConfig& config, VertexId v, bool modified);

  bool finished() const { return active_.empty(); }
  void step();
  void run();

  std::int64_t step_count() const { return step_count_; }
  const std::vector<VertexId>& removed() const { return removed_; }
  std::vector<VertexId> active() const;
  bool unseen(VertexId v) const {
    return (unseen_[static_cast<std::uint64_t>(v) >> 6] >> (v & 63)) & 1u;
  }

 private:
  void erase_unseen(VertexId v) {
    unseen_[static_cast<std::uint64_t>(v) >> 6] &= ~(1ull << (v & 63));
  }
  void remove_common_neighbors(VertexId fresh);

  const SiteConfig& config_;
  bool modified_;
  std::vector<std::uint64_t> unseen_;
  std::vector<VertexId> active_;  // maintained as a sorted min-heap
  std::vector<VertexId> removed_;
  std::int64_t step_count_ = 0;
};

// C_v exactly (empty when v is unoccupied), vertices ascending.
std::vector<VertexId> cluster_discovery(const SiteConfig& config, VertexId v);

// The variant with extra removals; always a subset of C_v, ascending.
std::vector<VertexId> modified_cluster_discovery(const SiteConfig& config,
                                                 VertexId v);

// Maximum occupied count over all axis-aligned planes fixing k coordinates,
// 1 <= k <= d-1.
std::int64_t plane_occupancy_max(const SiteConfig& config, int k);

// Census export: CSV rows (size, count) ascending by size.
void write_histogram_csv(const ComponentStats& stats, std::ostream& out);

// Summary JSON record for the census.
std::string stats_to_json(const ComponentStats& stats);

}  // namespace htpc
