#include "cubepersist/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace cubepersist {

int Bandwidth::block_extent(int j) const {
  int full = source_n / block;
  if (j < full) return block;
  if (j == full && source_n % block != 0) return source_n % block;
  throw std::domain_error("Bandwidth: block index out of range");
}

Bandwidth calibrate_bandwidth(int points_per_axis, int dim, double alpha,
                              double prefactor) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("calibrate_bandwidth: alpha must be in (0,1]");
  if (!(prefactor > 0.0))
    throw std::invalid_argument("calibrate_bandwidth: prefactor must be > 0");
  double n = std::pow(static_cast<double>(points_per_axis), dim);
  double target = prefactor * std::pow(std::log(n) / n, 1.0 / (dim + 2.0 * alpha));
  double scaled = points_per_axis * target;
  int b = static_cast<int>(std::floor(scaled + 0.5));  // half away from zero for b > 0
  b = std::max(1, std::min(points_per_axis, b));
  return Bandwidth{b, points_per_axis};
}

BlockField::BlockField(GridSpec source_grid, Bandwidth bw, std::vector<double> values)
    : source_grid_(source_grid), bw_(bw), values_(std::move(values)) {
  std::int64_t expect = 1;
  for (int j = 0; j < source_grid_.dim; ++j) expect *= bw_.blocks_per_axis();
  if (static_cast<std::int64_t>(values_.size()) != expect)
    throw std::invalid_argument("BlockField: value count does not match block grid");
}

std::int64_t BlockField::linear_block_index(const MultiIndex& block) const {
  std::int64_t flat = 0;
  int per_axis = blocks_per_axis();
  for (int j = 0; j < dim(); ++j) {
    if (block[j] < 0 || block[j] >= per_axis)
      throw std::domain_error("BlockField: block index out of range");
    flat = flat * per_axis + block[j];
  }
  return flat;
}

BlockField block_average(const ScalarField& obs, const Bandwidth& bw) {
  const GridSpec& grid = obs.grid();
  if (bw.source_n != grid.points_per_axis)
    throw std::invalid_argument("block_average: bandwidth built for a different grid");
  if (bw.block < 1 || bw.block > grid.points_per_axis)
    throw std::invalid_argument("block_average: block size out of range");

  const int per_axis = bw.blocks_per_axis();
  std::int64_t blocks = 1;
  for (int j = 0; j < grid.dim; ++j) blocks *= per_axis;
  std::vector<double> sum(blocks, 0.0);
  std::vector<std::int64_t> count(blocks, 0);

  const std::int64_t n = grid.sample_count();
  for (std::int64_t flat = 0; flat < n; ++flat) {
    MultiIndex k = grid.multi_index(flat);
    std::int64_t block_flat = 0;
    for (int j = 0; j < grid.dim; ++j)
      block_flat = block_flat * per_axis + (k[j] - 1) / bw.block;
    sum[block_flat] += obs[flat];
    ++count[block_flat];
  }
  for (std::int64_t i = 0; i < blocks; ++i) sum[i] /= static_cast<double>(count[i]);
  return BlockField(grid, bw, std::move(sum));
}

std::vector<std::uint8_t> sublevel_mask(const BlockField& est, double lambda) {
  std::vector<std::uint8_t> mask(est.block_count());
  for (std::int64_t i = 0; i < est.block_count(); ++i) mask[i] = est[i] <= lambda;
  return mask;
}

}  // namespace cubepersist
