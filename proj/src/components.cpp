#include "htpc/components.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace htpc {

namespace {

class Dsu {
 public:
  explicit Dsu(std::int64_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::int32_t find(std::int32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];  // path halving
      x = parent_[x];
    }
    return x;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> size_;
};

std::vector<std::int64_t> occupied_indices(const SiteConfig& config) {
  std::vector<std::int64_t> out;
  out.reserve(config.occupied_count);
  for (std::size_t w = 0; w < config.words.size(); ++w) {
    std::uint64_t bits = config.words[w];
    while (bits) {
      const int b = std::countr_zero(bits);
      out.push_back(static_cast<std::int64_t>(w) * 64 + b);
      bits &= bits - 1;
    }
  }
  return out;
}

// Chains consecutive occupied vertices along every line of every axis.
template <class IdOf>
void sweep_lines(const SiteConfig& config, Dsu& dsu, IdOf id_of) {
  const TorusSpec& spec = config.spec;
  for (int axis = 1; axis <= spec.d; ++axis) {
    const std::int64_t stride = spec.axis_stride(axis);
    const std::int64_t len = spec.side(axis);
    if (len < 2) continue;
    const std::int64_t block = stride * len;
    for (std::int64_t hi = 0; hi < spec.num_vertices; hi += block) {
      for (std::int64_t lo = 0; lo < stride; ++lo) {
        std::int32_t prev = -1;
        std::int64_t idx = hi + lo;
        for (std::int64_t k = 0; k < len; ++k, idx += stride) {
          if (!config.occupied(idx)) continue;
          const std::int32_t cur = id_of(idx);
          if (prev >= 0) dsu.unite(prev, cur);
          prev = cur;
        }
      }
    }
  }
}

ComponentStats tally(Dsu& dsu, std::int64_t occ) {
  std::vector<std::int64_t> by_root(occ, 0);
  for (std::int64_t i = 0; i < occ; ++i)
    ++by_root[dsu.find(static_cast<std::int32_t>(i))];

  ComponentStats stats;
  stats.occupied_count = occ;
  for (std::int64_t s : by_root) {
    if (s == 0) continue;
    stats.component_sizes.push_back(s);
    if (s == 1) ++stats.isolated_count;
  }
  std::sort(stats.component_sizes.begin(), stats.component_sizes.end(),
            std::greater<>());
  stats.component_count = static_cast<std::int64_t>(stats.component_sizes.size());
  stats.largest = stats.component_count > 0 ? stats.component_sizes[0] : 0;
  stats.second_largest =
      stats.component_count > 1 ? stats.component_sizes[1] : 0;
  stats.is_connected = stats.component_count <= 1;
  return stats;
}

}  // namespace

ComponentStats connected_components(const SiteConfig& config) {
  const std::int64_t occ = config.occupied_count;
  if (occ == 0) return ComponentStats{};
  if (occ > std::numeric_limits<std::int32_t>::max())
    throw std::length_error("occupied count exceeds the dense-id range");

  Dsu dsu(occ);
  if (occ < config.spec.num_vertices / 8) {
    // Sparse: binary search in the sorted occupied-index array.
    const std::vector<std::int64_t> occupied = occupied_indices(config);
    sweep_lines(config, dsu, [&occupied](std::int64_t idx) {
      return static_cast<std::int32_t>(
          std::lower_bound(occupied.begin(), occupied.end(), idx) -
          occupied.begin());
    });
  } else {
    // Dense: direct |V|-sized id table.
    std::vector<std::int32_t> table(config.spec.num_vertices, -1);
    std::int32_t next = 0;
    for (std::int64_t v = 0; v < config.spec.num_vertices; ++v)
      if (config.occupied(v)) table[v] = next++;
    sweep_lines(config, dsu,
                [&table](std::int64_t idx) { return table[idx]; });
  }
  return tally(dsu, occ);
}

std::map<std::int64_t, std::int64_t> ComponentStats::size_histogram() const {
  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t s : component_sizes) ++hist[s];
  return hist;
}

ClusterDiscovery::ClusterDiscovery(const SiteConfig& config, VertexId v,
                                   bool modified)
    : config_(config), modified_(modified) {
  const std::int64_t nv = config.spec.num_vertices;
  if (v < 0 || v >= nv) throw std::out_of_range("start vertex outside [0, |V|)");
  unseen_.assign((nv + 63) / 64, ~0ull);
  if (nv & 63) unseen_.back() = (~0ull) >> (64 - (nv & 63));
  erase_unseen(v);  // U_0 = V \ A_0
  // C_v is empty for an unoccupied start; the process begins dead.
  if (config.occupied(v)) active_.push_back(v);
}

std::vector<VertexId> ClusterDiscovery::active() const {
  std::vector<VertexId> out = active_;
  std::sort(out.begin(), out.end());
  return out;
}

void ClusterDiscovery::step() {
  if (active_.empty()) throw std::logic_error("discovery already finished");

  // Lexicographically smallest active vertex; index order is lex order.
  std::pop_heap(active_.begin(), active_.end(), std::greater<>());
  const VertexId focal = active_.back();
  active_.pop_back();

  const TorusSpec& spec = config_.spec;
  std::vector<VertexId> fresh;
  for (int axis = 1; axis <= spec.d; ++axis) {
    const std::int64_t stride = spec.axis_stride(axis);
    const std::int64_t len = spec.side(axis);
    const std::int64_t own = coord_on_axis(spec, focal, axis);
    VertexId w = focal - (own - 1) * stride;
    for (std::int64_t c = 1; c <= len; ++c, w += stride) {
      if (c == own || !unseen(w)) continue;
      if (config_.occupied(w)) fresh.push_back(w);
      erase_unseen(w);
    }
  }

  for (VertexId w : fresh) {
    active_.push_back(w);
    std::push_heap(active_.begin(), active_.end(), std::greater<>());
  }
  if (modified_)
    for (VertexId w : fresh) remove_common_neighbors(w);

  removed_.push_back(focal);
  ++step_count_;
}

// Removes every unseen vertex adjacent to both `fresh` and another active
// vertex. Pairs already active in earlier steps were handled when their later
// member was activated, so processing fresh-vs-active pairs covers them all;
// removals are cumulative, so reprocessing a pair is harmless.
void ClusterDiscovery::remove_common_neighbors(VertexId fresh) {
  const TorusSpec& spec = config_.spec;
  for (VertexId other : active_) {
    if (other == fresh) continue;
    int axis_a = 0, axis_b = 0;
    int differing = 0;
    for (int axis = 1; axis <= spec.d && differing <= 2; ++axis) {
      if (coord_on_axis(spec, fresh, axis) != coord_on_axis(spec, other, axis)) {
        if (differing == 0)
          axis_a = axis;
        else
          axis_b = axis;
        ++differing;
      }
    }
    if (differing == 1) {
      // Same line: the common neighborhood is the rest of that line.
      const std::int64_t stride = spec.axis_stride(axis_a);
      const std::int64_t len = spec.side(axis_a);
      const std::int64_t own = coord_on_axis(spec, fresh, axis_a);
      VertexId w = fresh - (own - 1) * stride;
      for (std::int64_t c = 1; c <= len; ++c, w += stride)
        if (w != fresh && w != other) erase_unseen(w);
    } else if (differing == 2) {
      // Hamming distance two: exactly the two corner vertices.
      const std::int64_t da =
          (coord_on_axis(spec, other, axis_a) - coord_on_axis(spec, fresh, axis_a)) *
          spec.axis_stride(axis_a);
      const std::int64_t db =
          (coord_on_axis(spec, other, axis_b) - coord_on_axis(spec, fresh, axis_b)) *
          spec.axis_stride(axis_b);
      erase_unseen(fresh + da);
      erase_unseen(fresh + db);
    }
  }
}

void ClusterDiscovery::run() {
  while (!finished()) step();
}

namespace {

std::vector<VertexId> run_discovery(const SiteConfig& config, VertexId v,
                                    bool modified) {
  ClusterDiscovery discovery(config, v, modified);
  discovery.run();
  std::vector<VertexId> out = discovery.removed();
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<VertexId> cluster_discovery(const SiteConfig& config, VertexId v) {
  return run_discovery(config, v, false);
}

std::vector<VertexId> modified_cluster_discovery(const SiteConfig& config,
                                                 VertexId v) {
  return run_discovery(config, v, true);
}

std::int64_t plane_occupancy_max(const SiteConfig& config, int k) {
  const TorusSpec& spec = config.spec;
  if (k < 1 || k > spec.d - 1)
    throw std::out_of_range("plane codimension k outside [1, d-1]");

  const std::vector<std::int64_t> occupied = occupied_indices(config);
  std::int64_t best = 0;

  std::vector<int> axes(k);
  std::iota(axes.begin(), axes.end(), 0);  // 0-based axis subset
  while (true) {
    std::int64_t plane_count = 1;
    for (int ax : axes) {
      if (plane_count > (std::int64_t{1} << 24) / spec.L[ax])
        throw std::length_error("plane count too large for the counting table");
      plane_count *= spec.L[ax];
    }

    std::vector<std::int64_t> counts(plane_count, 0);
    for (std::int64_t idx : occupied) {
      std::int64_t key = 0;
      for (int ax : axes)
        key = key * spec.L[ax] + idx / spec.stride[ax] % spec.L[ax];
      ++counts[key];
    }
    for (std::int64_t c : counts) best = std::max(best, c);

    // Next k-subset of {0, ..., d-1}.
    int pos = k - 1;
    while (pos >= 0 && axes[pos] == spec.d - k + pos) --pos;
    if (pos < 0) break;
    ++axes[pos];
    for (int i = pos + 1; i < k; ++i) axes[i] = axes[i - 1] + 1;
  }
  return best;
}

void write_histogram_csv(const ComponentStats& stats, std::ostream& out) {
  out << "size,count\n";
  for (const auto& [size, count] : stats.size_histogram())
    out << size << ',' << count << '\n';
}

std::string stats_to_json(const ComponentStats& stats) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\"largest\":%lld,\"second_largest\":%lld,"
                "\"isolated_count\":%lld,\"component_count\":%lld,"
                "\"occupied_count\":%lld,\"is_connected\":%s}",
                static_cast<long long>(stats.largest),
                static_cast<long long>(stats.second_largest),
                static_cast<long long>(stats.isolated_count),
                static_cast<long long>(stats.component_count),
                static_cast<long long>(stats.occupied_count),
                stats.is_connected ? "true" : "false");
  return buf;
}

}  // namespace htpc
