#pragma once

#include <cstdint>

#include "cubepersist/estimator.hpp"
#include "cubepersist/grid.hpp"
#include "cubepersist/signals.hpp"

namespace cubepersist {

/// Max over a fine evaluation grid of |f(x) - estimate(block containing x)|.
/// Points on shared block faces take the covering block with the smaller
/// index, matching the half-open index blocking.
double sup_norm_error(const SignalSpec& spec, const BlockField& est, int eval_n);

/// KL divergence between the product Gaussian observation laws of two signals
/// on a grid: sum over grid points of (f1(x_i) - f0(x_i))^2 / (2 sigma^2).
double kl_product_gaussians(const SignalSpec& spec1, const SignalSpec& spec0,
                            const GridSpec& grid, double sigma);

/// Normalized maximal block-averaged noise. Only complete blocks enter the
/// max. The noise scale cancels: the statistic of c*field equals that of
/// field for any c != 0, because the normalization uses the field's own
/// root mean square.
struct NhStatistic {
  double value = 0.0;
  double h = 0.0;
  int dim = 0;
  std::int64_t samples = 0;
  int block = 0;
  std::int64_t complete_blocks = 0;
};

NhStatistic noise_statistic(const ScalarField& noise_field, const Bandwidth& bw);

/// Empirical check of the two-sided sublevel sandwich: erosion of the true
/// sublevel set at lambda - shift must lie inside the estimated cube union at
/// lambda, which must lie inside the dilation of the true set at
/// lambda + shift. The shift is sqrt(2) * sigma * N_h * h^alpha computed from
/// the realized noise (obs minus the exact signal), and erosion/dilation use
/// Euclidean radius sqrt(d) * h on an oracle raster.
struct SandwichReport {
  bool inner_ok = true;
  bool outer_ok = true;
  bool calibration_ok = true;  // h^alpha > sqrt(log(1/h^d) / b^d)
  double nh = 0.0;             // sigma-normalized N_h
  double level_shift = 0.0;    // sqrt(2) sigma N_h h^alpha, sigma-free form
  std::int64_t inner_violations = 0;
  std::int64_t outer_violations = 0;
};

SandwichReport sandwich_check(const SignalSpec& spec, const ScalarField& obs,
                              const Bandwidth& bw, double lambda, int oracle_n);

}  // namespace cubepersist
