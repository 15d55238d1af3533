#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "cubepersist/distance_transform.hpp"
#include "cubepersist/harness.hpp"
#include "cubepersist/metrics.hpp"

using namespace cubepersist;

TEST_CASE("squared distance transform is exact against a direct scan") {
  Rng rng(1234);
  int shape[] = {13, 9};
  std::vector<std::uint8_t> mask(13 * 9, 0);
  for (auto& m : mask) m = rng.uniform01() < 0.2;
  auto d2 = squared_distance_field(mask, shape);
  for (int i = 0; i < 13; ++i) {
    for (int j = 0; j < 9; ++j) {
      double best = INFINITY;
      for (int a = 0; a < 13; ++a)
        for (int b = 0; b < 9; ++b)
          if (mask[a * 9 + b])
            best = std::min(best, double((i - a) * (i - a) + (j - b) * (j - b)));
      CHECK(d2[i * 9 + j] == best);
    }
  }
}

TEST_CASE("squared distance transform is exact in 3d") {
  Rng rng(555777);
  int shape[] = {7, 6, 5};
  std::vector<std::uint8_t> mask(7 * 6 * 5, 0);
  for (auto& m : mask) m = rng.uniform01() < 0.15;
  auto d2 = squared_distance_field(mask, shape);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 5; ++k) {
        double best = INFINITY;
        for (int a = 0; a < 7; ++a)
          for (int b = 0; b < 6; ++b)
            for (int c = 0; c < 5; ++c)
              if (mask[(a * 6 + b) * 5 + c])
                best = std::min(best, double((i - a) * (i - a) + (j - b) * (j - b) +
                                             (k - c) * (k - c)));
        CHECK(d2[(i * 6 + j) * 5 + k] == best);
      }
}

TEST_CASE("erosion and dilation bracket the set") {
  int shape[] = {20, 20};
  std::vector<std::uint8_t> mask(400, 0);
  for (int i = 5; i < 15; ++i)
    for (int j = 5; j < 15; ++j) mask[i * 20 + j] = 1;
  auto grown = dilate(mask, shape, 2.0);
  auto shrunk = erode(mask, shape, 2.0);
  int n_mask = 0, n_grown = 0, n_shrunk = 0;
  for (int i = 0; i < 400; ++i) {
    CHECK(shrunk[i] <= mask[i]);
    CHECK(mask[i] <= grown[i]);
    n_mask += mask[i];
    n_grown += grown[i];
    n_shrunk += shrunk[i];
  }
  CHECK(n_shrunk == 6 * 6);    // 10 - 2*2 per axis
  CHECK(n_grown > n_mask);
  // erode by more than the half-width empties the square
  auto gone = erode(mask, shape, 5.0);
  CHECK(std::count(gone.begin(), gone.end(), 1) == 0);
}

TEST_CASE("sup-norm error vanishes for a noiseless identity estimate") {
  GridSpec g(2, 10);
  SignalSpec disc = CosSineDisc{};
  ScalarField f = sample_on_grid(disc, g);
  // block size 1 reproduces the samples exactly; evaluating on the same grid
  // leaves no within-cell variation either
  BlockField est = block_average(f, Bandwidth{1, 10});
  CHECK(sup_norm_error(disc, est, 10) == 0.0);
}

TEST_CASE("sup-norm error near a jump is at least half the jump") {
  SignalSpec spec = shipped_disc_bumps(1.0);
  GridSpec g(2, 50);
  ScalarField clean = sample_on_grid(spec, g);
  BlockField est = block_average(clean, calibrate_bandwidth(50, 2, 1.0, 0.25));
  CHECK(sup_norm_error(spec, est, 400) >= 0.45);
}

TEST_CASE("kl divergence examples") {
  GridSpec g(1, 100);
  LowerBoundBase base{1.0, 1.0, 1.0, 1};
  LowerBoundBump bump{1.0, 1.0, 1.0, 1, 0.1, 5};

  CHECK(kl_product_gaussians(base, base, g, 0.5) == 0.0);

  double kl = kl_product_gaussians(bump, base, g, 1.0);
  // independent sum over the 21 grid points inside the bump box
  double expect = 0.0;
  int count = 0;
  for (int k = 1; k <= 100; ++k) {
    double x = k / 100.0;
    double diff = -1.0 * std::max(0.1 - std::abs(x - 0.5), 0.0);
    if (std::abs(x - 0.5) <= 0.1) ++count;
    expect += diff * diff / 2.0;
  }
  CHECK(count == 21);
  CHECK(kl == doctest::Approx(expect).epsilon(1e-13));
  CHECK(kl == doctest::Approx(0.0335).epsilon(1e-12));

  // exact sigma scaling
  CHECK(kl_product_gaussians(bump, base, g, 2.0) == doctest::Approx(kl / 4.0));

  // single point with unit mean gap at sigma 0.1
  GridSpec tiny(1, 2);
  LowerBoundBase zero{0.0, 0.0, 1.0, 1};
  LowerBoundBase half{1.0, 2.0, 1.0, 1};  // c = 1/2, f(x) = x/2
  double v = kl_product_gaussians(half, zero, tiny, 0.1);
  // grid points 0.5 and 1.0 with gaps 0.25 and 0.5
  CHECK(v == doctest::Approx((0.0625 + 0.25) / 0.02));
}

TEST_CASE("noise statistic: zero field, sigma invariance, errors") {
  GridSpec g(2, 12);
  Bandwidth bw{3, 12};
  ScalarField zero(g, std::vector<double>(g.sample_count(), 0.0));
  CHECK(noise_statistic(zero, bw).value == 0.0);

  Rng rng(432);
  std::vector<double> eps(g.sample_count());
  for (double& v : eps) v = rng.normal();
  std::vector<double> small(eps), big(eps);
  for (double& v : small) v *= 0.1;
  for (double& v : big) v *= 10.0;
  double a = noise_statistic(ScalarField(g, small), bw).value;
  double b = noise_statistic(ScalarField(g, big), bw).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));

  CHECK_THROWS_AS(noise_statistic(zero, Bandwidth{12, 12}), std::invalid_argument);
}

TEST_CASE("noise statistic only uses complete blocks") {
  GridSpec g(1, 10);
  // block 3: blocks {1..3},{4..6},{7..9} complete, {10} truncated
  std::vector<double> v(10, 0.0);
  v[9] = 100.0;  // only in the truncated block
  v[0] = 0.3;
  v[1] = 0.3;
  v[2] = 0.3;
  Bandwidth bw{3, 10};
  NhStatistic st = noise_statistic(ScalarField(g, v), bw);
  CHECK(st.complete_blocks == 3);
  // max complete block mean is 0.3; normalization uses the rms of all values
  double rms = std::sqrt((3 * 0.09 + 10000.0) / 10.0);
  double norm = std::sqrt(2.0 * std::log(1.0 / std::pow(0.3, 1)) / 3.0);
  CHECK(st.value == doctest::Approx(0.3 / (rms * norm)));
}

TEST_CASE("noise statistic matches its closed-form law") {
  // With B complete blocks the statistic is max of B iid |N(0,1)| values over
  // sqrt(2 log(1/h^d)); compare empirical quantiles against the closed form.
  const int n = 36, b = 6, reps = 4000;
  GridSpec g(2, n);
  Bandwidth bw{b, n};
  SeedStream master(999);
  std::vector<double> draws(reps);
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(master.derived({static_cast<std::uint64_t>(rep)}));
    std::vector<double> eps(g.sample_count());
    for (double& v : eps) v = rng.normal();
    draws[rep] = noise_statistic(ScalarField(g, eps), bw).value;
  }
  std::sort(draws.begin(), draws.end());
  const double B = 36.0;  // (36/6)^2 blocks
  double log_term = std::log(1.0 / std::pow(b / double(n), 2));
  auto cdf = [&](double t) {
    double z = t * std::sqrt(2.0 * log_term);
    double per_block = std::erf(z / std::numbers::sqrt2);
    return std::pow(per_block, B);
  };
  // Kolmogorov-Smirnov distance within the 99% band (1.63/sqrt(reps)) plus a
  // margin for the rms normalization jitter at 6^2*36 samples per draw.
  double ks = 0.0;
  for (int i = 0; i < reps; ++i) {
    double emp = (i + 1.0) / reps;
    ks = std::max(ks, std::abs(emp - cdf(draws[i])));
  }
  CHECK(ks < 1.63 / std::sqrt(double(reps)) + 0.02);
}

TEST_CASE("sandwich holds surely without noise and trivially off-range") {
  SignalSpec spec = CosSineDisc{};
  GridSpec g(2, 50);
  ScalarField clean = sample_on_grid(spec, g);
  Bandwidth bw = calibrate_bandwidth(50, 2, 1.0, 0.25);

  SandwichReport mid = sandwich_check(spec, clean, bw, 0.0, 400);
  CHECK(mid.nh == 0.0);
  CHECK(mid.level_shift == 0.0);
  CHECK(mid.inner_ok);
  CHECK(mid.outer_ok);

  // lambda far below the minimum: all three sets empty
  SandwichReport low = sandwich_check(spec, clean, bw, -10.0, 200);
  CHECK(low.inner_ok);
  CHECK(low.outer_ok);

  // noisy single check still reports the statistic
  Rng rng(2024);
  ScalarField obs = add_noise(clean, NoiseModel{0.1}, rng);
  SandwichReport noisy = sandwich_check(spec, obs, bw, 0.0, 400);
  CHECK(noisy.nh > 0.0);
  CHECK(noisy.level_shift > 0.0);
  CHECK_FALSE(noisy.calibration_ok);  // 0.06 < sqrt(log(1/h^2)/9) at N=50
}

TEST_CASE("clopper-pearson upper bounds behave sanely") {
  CHECK(clopper_pearson_upper(0, 100, 0.99) == doctest::Approx(0.045).epsilon(0.05));
  CHECK(clopper_pearson_upper(100, 100, 0.99) == 1.0);
  double p1 = clopper_pearson_upper(3, 10000, 0.99);
  CHECK(p1 > 3.0 / 10000.0);
  CHECK(p1 < 1.2e-3);
}
