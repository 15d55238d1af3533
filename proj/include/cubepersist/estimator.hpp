#pragma once

#include <cstdint>
#include <vector>

#include "cubepersist/grid.hpp"

namespace cubepersist {

/// Axis-aligned blocking of a grid: b consecutive indices per axis form one
/// block of side h = b/N. When b does not divide N the last block per axis is
/// truncated and averages only the points it actually contains.
struct Bandwidth {
  int block = 1;     // b, grid points per axis per block
  int source_n = 2;  // N of the grid this bandwidth was built for

  double h() const { return static_cast<double>(block) / source_n; }
  int blocks_per_axis() const { return (source_n + block - 1) / block; }
  /// Number of source indices in block j (0-based) along one axis.
  int block_extent(int j) const;
};

/// b = clamp(round(N * h*), 1, N) with h* = prefactor * (log n / n)^(1/(d+2a)),
/// n = N^d. Rounding is half away from zero.
Bandwidth calibrate_bandwidth(int points_per_axis, int dim, double alpha,
                              double prefactor);

/// Per-block means of a scalar field.
class BlockField {
 public:
  BlockField(GridSpec source_grid, Bandwidth bw, std::vector<double> values);

  const GridSpec& source_grid() const { return source_grid_; }
  const Bandwidth& bandwidth() const { return bw_; }
  int dim() const { return source_grid_.dim; }
  int blocks_per_axis() const { return bw_.blocks_per_axis(); }
  const std::vector<double>& values() const { return values_; }
  std::int64_t block_count() const { return static_cast<std::int64_t>(values_.size()); }
  double operator[](std::int64_t flat) const { return values_[flat]; }

  std::int64_t linear_block_index(const MultiIndex& block) const;  // 0-based blocks

 private:
  GridSpec source_grid_;
  Bandwidth bw_;
  std::vector<double> values_;
};

BlockField block_average(const ScalarField& obs, const Bandwidth& bw);

/// mask[J] = (block value <= lambda); the union of the closed block cubes
/// with mask true is the estimated sublevel set.
std::vector<std::uint8_t> sublevel_mask(const BlockField& est, double lambda);

}  // namespace cubepersist
