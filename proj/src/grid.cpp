#include "cubepersist/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cubepersist {

GridSpec::GridSpec(int d, int n) : dim(d), points_per_axis(n) {
  if (d < 1 || d > kMaxDim)
    throw std::invalid_argument("GridSpec: dim must be in [1," +
                                std::to_string(kMaxDim) + "]");
  if (n < 2) throw std::invalid_argument("GridSpec: need at least 2 points per axis");
}

std::int64_t GridSpec::sample_count() const {
  std::int64_t n = 1;
  for (int j = 0; j < dim; ++j) n *= points_per_axis;
  return n;
}

std::int64_t GridSpec::linear_index(const MultiIndex& k) const {
  std::int64_t flat = 0;
  for (int j = 0; j < dim; ++j) {
    if (k[j] < 1 || k[j] > points_per_axis)
      throw std::domain_error("GridSpec: index component out of range");
    flat = flat * points_per_axis + (k[j] - 1);
  }
  return flat;
}

MultiIndex GridSpec::multi_index(std::int64_t flat) const {
  MultiIndex k{};
  for (int j = dim - 1; j >= 0; --j) {
    k[j] = static_cast<int>(flat % points_per_axis) + 1;
    flat /= points_per_axis;
  }
  return k;
}

Point index_to_point(const GridSpec& grid, const MultiIndex& k) {
  Point x{};
  for (int j = 0; j < grid.dim; ++j) {
    if (k[j] < 1 || k[j] > grid.points_per_axis)
      throw std::domain_error("index_to_point: index component out of range");
    x[j] = static_cast<double>(k[j]) / grid.points_per_axis;
  }
  return x;
}

MultiIndex point_to_nearest_index(const GridSpec& grid, const Point& x) {
  MultiIndex k{};
  for (int j = 0; j < grid.dim; ++j) {
    int kj = static_cast<int>(std::lround(x[j] * grid.points_per_axis));
    if (kj < 1) kj = 1;
    if (kj > grid.points_per_axis) kj = grid.points_per_axis;
    k[j] = kj;
  }
  return k;
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::int64_t>(values_.size()) != grid_.sample_count())
    throw std::invalid_argument("ScalarField: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("ScalarField: non-finite value");
}

}  // namespace cubepersist
