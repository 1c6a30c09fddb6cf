#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace htpc {

using VertexId = std::int64_t;

// Geometry of the d-dimensional Hamming torus: integer points of an
// L_1 x ... x L_d box with L_i = round(a_i * n), all vertices at Hamming
// distance one adjacent. Adjacency is arithmetic; no edge list exists.
//
// Coordinates are 1-based (x_i in [1, L_i]); vertex indices are 0-based in
// mixed radix with the last coordinate fastest, so index order equals
// lexicographic order on coordinate tuples. Axes are 1-based throughout.
struct TorusSpec {
  int d = 0;
  Eigen::VectorXd a;                 // aspect ratios as given, unsorted
  long n = 0;                        // scale parameter
  std::vector<std::int64_t> L;       // side lengths, L[i] = round(a[i]*n) >= 1
  std::vector<std::int64_t> stride;  // stride[i] = prod_{j>i} L[j]
  std::int64_t num_vertices = 0;     // prod L, overflow-checked

  std::int64_t side(int axis) const { return L[axis - 1]; }
  std::int64_t axis_stride(int axis) const { return stride[axis - 1]; }

  // Sum over axes of (L_i - 1); every vertex has this many neighbors.
  std::int64_t degree() const;
};

// Throws std::invalid_argument on d < 1, a_i <= 0, n < 1 or a size mismatch,
// std::overflow_error when prod L_i exceeds the index range.
TorusSpec make_spec(int d, const Eigen::VectorXd& a, long n);

std::vector<std::int64_t> coords_of(const TorusSpec& spec, VertexId v);
VertexId index_of(const TorusSpec& spec, const std::vector<std::int64_t>& coords);

// 1-based coordinate of v along `axis`, without materializing all coords.
std::int64_t coord_on_axis(const TorusSpec& spec, VertexId v, int axis);

int hamming_distance(const TorusSpec& spec, VertexId u, VertexId v);

// The L_axis - 1 vertices differing from v only in `axis`, ascending by that
// coordinate.
std::vector<VertexId> neighbors_on_axis(const TorusSpec& spec, VertexId v,
                                        int axis);

// Axis-parallel lines (the maximal cliques). A line is identified by its
// axis and the index of its first vertex (coordinate on `axis` equal to 1);
// members are base, base + stride, ..., base + (L-1)*stride.
struct LineId {
  int axis = 0;
  VertexId base = 0;
};

std::int64_t line_count(const TorusSpec& spec, int axis);  // |V| / L_axis

// Enumerates every line of `axis`; f(LineId) is called line_count times.
template <class F>
void for_each_line(const TorusSpec& spec, int axis, F&& f) {
  const std::int64_t stride = spec.axis_stride(axis);
  const std::int64_t len = spec.side(axis);
  const std::int64_t block = stride * len;
  for (std::int64_t hi = 0; hi < spec.num_vertices; hi += block)
    for (std::int64_t lo = 0; lo < stride; ++lo)
      f(LineId{axis, hi + lo});
}

}  // namespace htpc
