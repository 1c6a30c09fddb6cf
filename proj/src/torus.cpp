#include "htpc/torus.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace htpc {

std::int64_t TorusSpec::degree() const {
  std::int64_t deg = 0;
  for (std::int64_t len : L) deg += len - 1;
  return deg;
}

TorusSpec make_spec(int d, const Eigen::VectorXd& a, long n) {
  if (d < 1) throw std::invalid_argument("dimension d must be >= 1");
  if (a.size() != d)
    throw std::invalid_argument("aspect vector has " + std::to_string(a.size()) +
                                " entries, expected d = " + std::to_string(d));
  if (n < 1) throw std::invalid_argument("scale n must be >= 1");

  TorusSpec spec;
  spec.d = d;
  spec.a = a;
  spec.n = n;
  spec.L.resize(d);
  for (int i = 0; i < d; ++i) {
    if (!(a[i] > 0.0))
      throw std::invalid_argument("aspect ratio a_" + std::to_string(i + 1) +
                                  " must be positive");
    std::int64_t side = std::llround(a[i] * static_cast<double>(n));
    if (side < 1) side = 1;
    spec.L[i] = side;
  }

  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t total = 1;
  for (std::int64_t side : spec.L) {
    if (total > kMax / side)
      throw std::overflow_error("vertex count exceeds the index range");
    total *= side;
  }
  spec.num_vertices = total;

  spec.stride.assign(d, 1);
  for (int i = d - 2; i >= 0; --i) spec.stride[i] = spec.stride[i + 1] * spec.L[i + 1];
  return spec;
}

std::vector<std::int64_t> coords_of(const TorusSpec& spec, VertexId v) {
  std::vector<std::int64_t> coords(spec.d);
  for (int i = 0; i < spec.d; ++i) {
    coords[i] = v / spec.stride[i] % spec.L[i] + 1;
  }
  return coords;
}

VertexId index_of(const TorusSpec& spec, const std::vector<std::int64_t>& coords) {
  if (static_cast<int>(coords.size()) != spec.d)
    throw std::invalid_argument("coordinate count does not match dimension");
  VertexId v = 0;
  for (int i = 0; i < spec.d; ++i) {
    if (coords[i] < 1 || coords[i] > spec.L[i])
      throw std::out_of_range("coordinate " + std::to_string(i + 1) +
                              " outside [1, L]");
    v += (coords[i] - 1) * spec.stride[i];
  }
  return v;
}

std::int64_t coord_on_axis(const TorusSpec& spec, VertexId v, int axis) {
  return v / spec.stride[axis - 1] % spec.L[axis - 1] + 1;
}

int hamming_distance(const TorusSpec& spec, VertexId u, VertexId v) {
  int dist = 0;
  for (int axis = 1; axis <= spec.d; ++axis)
    dist += coord_on_axis(spec, u, axis) != coord_on_axis(spec, v, axis);
  return dist;
}

std::vector<VertexId> neighbors_on_axis(const TorusSpec& spec, VertexId v,
                                        int axis) {
  if (axis < 1 || axis > spec.d) throw std::out_of_range("axis outside [1, d]");
  const std::int64_t stride = spec.axis_stride(axis);
  const std::int64_t len = spec.side(axis);
  const std::int64_t own = coord_on_axis(spec, v, axis);
  const VertexId base = v - (own - 1) * stride;
  std::vector<VertexId> out;
  out.reserve(len - 1);
  for (std::int64_t c = 1; c <= len; ++c)
    if (c != own) out.push_back(base + (c - 1) * stride);
  return out;
}

std::int64_t line_count(const TorusSpec& spec, int axis) {
  if (axis < 1 || axis > spec.d) throw std::out_of_range("axis outside [1, d]");
  return spec.num_vertices / spec.side(axis);
}

}  // namespace htpc
