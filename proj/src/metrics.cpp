#include "cubepersist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cubepersist/distance_transform.hpp"

namespace cubepersist {

namespace {

// Block (0-based) covering grid point k (1-based): indices ((J-1)b, Jb].
int block_of_index(int k, int b) { return (k - 1) / b; }

std::int64_t int_pow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Max over complete blocks of |block mean| of a field.
double max_complete_block_mean(const ScalarField& field, const Bandwidth& bw) {
  const GridSpec& grid = field.grid();
  const int full = grid.points_per_axis / bw.block;
  const int per_axis = bw.blocks_per_axis();
  std::vector<double> sum(int_pow(per_axis, grid.dim), 0.0);
  std::vector<std::uint8_t> complete(sum.size(), 0);
  for (std::int64_t flat = 0; flat < grid.sample_count(); ++flat) {
    MultiIndex k = grid.multi_index(flat);
    bool is_complete = true;
    std::int64_t block_flat = 0;
    for (int j = 0; j < grid.dim; ++j) {
      int bj = block_of_index(k[j], bw.block);
      if (bj >= full) is_complete = false;
      block_flat = block_flat * per_axis + bj;
    }
    if (is_complete) {
      sum[block_flat] += field[flat];
      complete[block_flat] = 1;
    }
  }
  const double block_points = static_cast<double>(int_pow(bw.block, grid.dim));
  double out = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i)
    if (complete[i]) out = std::max(out, std::abs(sum[i]) / block_points);
  return out;
}

}  // namespace

double sup_norm_error(const SignalSpec& spec, const BlockField& est, int eval_n) {
  const GridSpec& src = est.source_grid();
  if (eval_n < src.points_per_axis)
    throw std::invalid_argument("sup_norm_error: eval grid must be at least as fine");
  const int dim = src.dim;
  GridSpec eval_grid(dim, eval_n);
  const int b = est.bandwidth().block;
  const int per_axis = est.blocks_per_axis();
  const std::int64_t n = eval_grid.sample_count();
  double worst = 0.0;
  for (std::int64_t flat = 0; flat < n; ++flat) {
    MultiIndex k = eval_grid.multi_index(flat);
    Point x = index_to_point(eval_grid, k);
    std::int64_t block_flat = 0;
    for (int j = 0; j < dim; ++j) {
      // source index whose half-open cell ((k-1)/N, k/N] contains x[j]
      int src_idx = static_cast<int>(std::ceil(x[j] * src.points_per_axis - 1e-12));
      src_idx = std::max(1, std::min(src.points_per_axis, src_idx));
      block_flat = block_flat * per_axis + block_of_index(src_idx, b);
    }
    double err = std::abs(eval_exact(spec, x, dim) - est[block_flat]);
    worst = std::max(worst, err);
  }
  return worst;
}

double kl_product_gaussians(const SignalSpec& spec1, const SignalSpec& spec0,
                            const GridSpec& grid, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("kl_product_gaussians: sigma must be > 0");
  if (dimension(spec1) != grid.dim || dimension(spec0) != grid.dim)
    throw std::invalid_argument("kl_product_gaussians: dimension mismatch");
  const std::int64_t n = grid.sample_count();
  double sum = 0.0;
  for (std::int64_t flat = 0; flat < n; ++flat) {
    Point x = index_to_point(grid, grid.multi_index(flat));
    double diff = eval_exact(spec1, x, grid.dim) - eval_exact(spec0, x, grid.dim);
    sum += diff * diff;
  }
  return sum / (2.0 * sigma * sigma);
}

NhStatistic noise_statistic(const ScalarField& noise_field, const Bandwidth& bw) {
  const GridSpec& grid = noise_field.grid();
  if (bw.source_n != grid.points_per_axis)
    throw std::invalid_argument("noise_statistic: bandwidth built for a different grid");
  if (bw.block < 1 || bw.block > grid.points_per_axis)
    throw std::invalid_argument("noise_statistic: block size out of range");

  NhStatistic st;
  st.h = bw.h();
  st.dim = grid.dim;
  st.samples = grid.sample_count();
  st.block = bw.block;
  if (!(st.h < 1.0))
    throw std::invalid_argument("noise_statistic: requires h < 1 so log(1/h^d) > 0");
  st.complete_blocks = int_pow(grid.points_per_axis / bw.block, grid.dim);

  double ss = 0.0;
  for (double v : noise_field.values()) ss += v * v;
  double rms = std::sqrt(ss / static_cast<double>(st.samples));
  if (rms == 0.0) return st;  // zero noise

  double max_mean = max_complete_block_mean(noise_field, bw);
  double block_points = static_cast<double>(int_pow(bw.block, grid.dim));
  double log_term = std::log(1.0 / std::pow(st.h, grid.dim));
  st.value = max_mean / (rms * std::sqrt(2.0 * log_term / block_points));
  return st;
}

SandwichReport sandwich_check(const SignalSpec& spec, const ScalarField& obs,
                              const Bandwidth& bw, double lambda, int oracle_n) {
  const GridSpec& grid = obs.grid();
  const int dim = grid.dim;
  if (dimension(spec) != dim)
    throw std::invalid_argument("sandwich_check: dimension mismatch");
  if (oracle_n < grid.points_per_axis)
    throw std::invalid_argument("sandwich_check: oracle grid must be at least as fine");

  SandwichReport rep;
  const double h = bw.h();
  const double alpha = get_alpha(spec);
  const double h_alpha = std::pow(h, alpha);
  const double block_points = static_cast<double>(int_pow(bw.block, dim));
  const double log_term = std::log(1.0 / std::pow(h, dim));
  rep.calibration_ok = h_alpha > std::sqrt(log_term / block_points);

  // Realized noise. The level shift sqrt(2) sigma N_h h^alpha involves sigma
  // only through sigma * N_h = max block mean / sqrt(2 log(1/h^d) / b^d), so
  // no noise scale has to be supplied or estimated for it.
  ScalarField signal = sample_on_grid(spec, grid);
  std::vector<double> noise(obs.values());
  for (std::int64_t i = 0; i < obs.size(); ++i) noise[i] -= signal[i];
  ScalarField noise_field(grid, std::move(noise));
  rep.nh = noise_statistic(noise_field, bw).value;
  double sigma_nh =
      max_complete_block_mean(noise_field, bw) / std::sqrt(2.0 * log_term / block_points);
  rep.level_shift = std::sqrt(2.0) * sigma_nh * h_alpha;

  BlockField est = block_average(obs, bw);
  std::vector<std::uint8_t> mask = sublevel_mask(est, lambda);
  const int per_axis = bw.blocks_per_axis();

  // Oracle rasters of the true sublevel sets at the shifted levels.
  GridSpec oracle(dim, oracle_n);
  ScalarField truth = sample_on_grid(spec, oracle);
  std::vector<int> shape(dim, oracle_n);
  std::vector<std::uint8_t> low(truth.size()), high(truth.size());
  for (std::int64_t i = 0; i < truth.size(); ++i) {
    low[i] = truth[i] <= lambda - rep.level_shift;
    high[i] = truth[i] <= lambda + rep.level_shift;
  }
  const double radius_px = std::sqrt(static_cast<double>(dim)) * h * oracle_n;
  std::vector<std::uint8_t> inner_set = erode(low, shape, radius_px);
  std::vector<std::uint8_t> outer_set = dilate(high, shape, radius_px);

  // Point x belongs to the estimate iff some masked closed block cube
  // contains it; on a shared face both neighboring blocks qualify.
  auto in_estimate = [&](const MultiIndex& k_oracle) {
    std::array<std::array<int, 2>, 3> cand{};
    std::array<int, 3> n_cand{};
    for (int j = 0; j < dim; ++j) {
      double scaled = static_cast<double>(k_oracle[j]) * grid.points_per_axis /
                      (static_cast<double>(oracle_n) * bw.block);
      int upper = static_cast<int>(std::floor(scaled + 1e-12));
      int lower = static_cast<int>(std::ceil(scaled - 1e-12)) - 1;
      upper = std::max(0, std::min(per_axis - 1, upper));
      lower = std::max(0, std::min(per_axis - 1, lower));
      int c = 0;
      cand[j][c++] = lower;
      if (upper != lower) cand[j][c++] = upper;
      n_cand[j] = c;
    }
    int combos = 1;
    for (int j = 0; j < dim; ++j) combos *= n_cand[j];
    for (int m = 0; m < combos; ++m) {
      int rem = m;
      std::int64_t flat = 0;
      for (int j = 0; j < dim; ++j) {
        flat = flat * per_axis + cand[j][rem % n_cand[j]];
        rem /= n_cand[j];
      }
      if (mask[flat]) return true;
    }
    return false;
  };

  for (std::int64_t flat = 0; flat < truth.size(); ++flat) {
    MultiIndex k = oracle.multi_index(flat);
    bool est_member = in_estimate(k);
    if (inner_set[flat] && !est_member) ++rep.inner_violations;
    if (est_member && !outer_set[flat]) ++rep.outer_violations;
  }
  rep.inner_ok = rep.inner_violations == 0;
  rep.outer_ok = rep.outer_violations == 0;
  return rep;
}

}  // namespace cubepersist
