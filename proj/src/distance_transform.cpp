#include "cubepersist/distance_transform.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>

namespace cubepersist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D lower envelope of parabolas (Felzenszwalb-Huttenlocher), f -> d with
// d[q] = min_p ((q-p)^2 + f[p]).
void edt_1d(std::span<double> f, std::span<double> d, std::span<int> v,
            std::span<double> z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (true) {
      if (f[v[k]] == kInf) {
        // previous vertex is unusable; replace it
        if (k == 0) {
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      double s = ((f[q] + q * static_cast<double>(q)) -
                  (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
                 (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  if (f[v[0]] == kInf) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  int k2 = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k2 + 1] < q) ++k2;
    double dq = q - static_cast<double>(v[k2]);
    d[q] = dq * dq + f[v[k2]];
  }
}

}  // namespace

std::vector<double> squared_distance_field(const std::vector<std::uint8_t>& set_mask,
                                           std::span<const int> shape) {
  const int dim = static_cast<int>(shape.size());
  if (dim < 1 || dim > 3) throw std::invalid_argument("squared_distance_field: bad dim");
  std::int64_t total = 1;
  int max_axis = 0;
  for (int j = 0; j < dim; ++j) {
    total *= shape[j];
    max_axis = std::max(max_axis, shape[j]);
  }
  if (static_cast<std::int64_t>(set_mask.size()) != total)
    throw std::invalid_argument("squared_distance_field: mask size mismatch");

  std::vector<double> dist(total);
  for (std::int64_t i = 0; i < total; ++i) dist[i] = set_mask[i] ? 0.0 : kInf;

  std::vector<double> line(max_axis), out(max_axis), z(max_axis + 1);
  std::vector<int> v(max_axis);

  // Sweep one axis at a time; strides derived from row-major layout.
  std::array<std::int64_t, 3> stride{};
  stride[dim - 1] = 1;
  for (int j = dim - 2; j >= 0; --j) stride[j] = stride[j + 1] * shape[j + 1];

  for (int axis = 0; axis < dim; ++axis) {
    const int len = shape[axis];
    const std::int64_t s = stride[axis];
    const std::int64_t lines = total / len;
    for (std::int64_t li = 0; li < lines; ++li) {
      // base offset: enumerate index combinations of the other axes
      std::int64_t rem = li, base = 0;
      for (int j = dim - 1; j >= 0; --j) {
        if (j == axis) continue;
        std::int64_t coord = rem % shape[j];
        rem /= shape[j];
        base += coord * stride[j];
      }
      for (int q = 0; q < len; ++q) line[q] = dist[base + q * s];
      edt_1d(std::span<double>(line.data(), len), std::span<double>(out.data(), len),
             std::span<int>(v.data(), len), std::span<double>(z.data(), len + 1));
      for (int q = 0; q < len; ++q) dist[base + q * s] = out[q];
    }
  }
  return dist;
}

std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& set_mask,
                                 std::span<const int> shape, double radius) {
  auto d2 = squared_distance_field(set_mask, shape);
  std::vector<std::uint8_t> out(set_mask.size());
  double r2 = radius * radius;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d2[i] <= r2;
  return out;
}

std::vector<std::uint8_t> erode(const std::vector<std::uint8_t>& set_mask,
                                std::span<const int> shape, double radius) {
  std::vector<std::uint8_t> comp(set_mask.size());
  for (std::size_t i = 0; i < comp.size(); ++i) comp[i] = !set_mask[i];
  auto d2 = squared_distance_field(comp, shape);
  std::vector<std::uint8_t> out(set_mask.size());
  double r2 = radius * radius;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = d2[i] > r2;
  return out;
}

}  // namespace cubepersist
