#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cubepersist/bottleneck.hpp"
#include "cubepersist/cubical.hpp"
#include "cubepersist/estimator.hpp"
#include "cubepersist/harness.hpp"

using namespace cubepersist;

namespace {

ExperimentConfig tiny_convergence() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kConvergence;
  cfg.signal = CosSineDisc{};
  cfg.resolutions = {10, 20};
  cfg.sigma = 0.1;
  cfg.prefactor = 0.25;
  cfg.repetitions = 3;
  cfg.master_seed = 7;
  cfg.oracle_n = 60;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  ExperimentConfig cfg = tiny_convergence();
  ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  nlohmann::json bad = cfg.to_json();
  bad["resolutions"] = {20, 10};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
  bad = cfg.to_json();
  bad["repetitions"] = 0;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
  bad = cfg.to_json();
  bad["oracle_n"] = 20;  // must exceed the largest resolution
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
  bad = cfg.to_json();
  bad["kind"] = "unheard_of";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
}

TEST_CASE("runs are deterministic and thread-count invariant") {
  ExperimentConfig cfg = tiny_convergence();
  cfg.threads = 1;
  ExperimentReport serial = run_convergence(cfg);
  cfg.threads = 4;
  ExperimentReport parallel = run_convergence(cfg);
  CHECK(serial.raw_csv() == parallel.raw_csv());
  CHECK(report_hash(serial) == report_hash(parallel));

  ExperimentReport again = run_convergence(cfg);
  CHECK(again.raw_csv() == parallel.raw_csv());
}

TEST_CASE("summary equals a recomputation from the raw rows") {
  ExperimentConfig cfg = tiny_convergence();
  ExperimentReport report = run_convergence(cfg);
  REQUIRE(report.rows.size() == 2 * 3);
  for (int n : cfg.resolutions) {
    double sum = 0.0;
    int count = 0;
    for (const RawRow& r : report.rows)
      if (r.resolution == n) {
        sum += r.bottleneck;
        ++count;
      }
    CHECK(count == 3);
    double mean = sum / count;
    // find the row in summary.csv
    std::string summary = report.summary_csv();
    char needle[64];
    std::snprintf(needle, sizeof(needle), ",%d,%d,", n, count);
    auto pos = summary.find(needle);
    REQUIRE(pos != std::string::npos);
    double reported = std::stod(summary.substr(pos + std::strlen(needle)));
    CHECK(reported == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("emit_report writes every table") {
  ExperimentConfig cfg = tiny_convergence();
  cfg.repetitions = 2;
  auto dir = std::filesystem::temp_directory_path() / "cubepersist_report_test";
  std::filesystem::remove_all(dir);
  cfg.output_dir = dir.string();
  ExperimentReport report = run_convergence(cfg);
  emit_report(report, dir);
  CHECK(std::filesystem::exists(dir / "raw.csv"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "config.json"));
  CHECK(std::filesystem::exists(dir / "plotdata"));
  CHECK(slurp(dir / "raw.csv") == report.raw_csv());

  // an empty report still writes headers
  ExperimentReport empty;
  empty.config = cfg;
  auto dir2 = std::filesystem::temp_directory_path() / "cubepersist_report_empty";
  std::filesystem::remove_all(dir2);
  emit_report(empty, dir2);
  CHECK(slurp(dir2 / "raw.csv") == "kind,alpha,N,rep,seed,bottleneck,supnorm,time_s\n");
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("timing rows time only the persistence stage") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTiming;
  cfg.signal = CosSineDisc{};
  cfg.resolutions = {10, 40};
  cfg.repetitions = 2;
  cfg.prefactor = 0.25;
  cfg.oracle_n = 50;
  ExperimentReport report = run_timing(cfg);
  REQUIRE(report.rows.size() == 4);
  for (const RawRow& r : report.rows) {
    CHECK(r.time_s >= 0.0);
    CHECK(r.time_s < 5.0);  // persistence of tiny complexes cannot take seconds
    CHECK(r.bottleneck == 0.0);
  }
  // raw csv for non-timing kinds reports zero in the time column
  ExperimentReport conv = run_convergence(tiny_convergence());
  std::string csv = conv.raw_csv();
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    auto pos = line.rfind(',');
    CHECK(line.substr(pos + 1) == "0");
  }
}

TEST_CASE("noiseless identity pipeline reproduces the oracle diagram") {
  // sigma = 0 and block 1 make the estimator the exact samples, so its
  // diagram coincides with an oracle run at the same resolution
  SignalSpec spec = CosSineDisc{};
  const int n = 40;
  GridSpec g(2, n);
  ScalarField clean = sample_on_grid(spec, g);
  BlockField est = block_average(clean, Bandwidth{1, n});
  std::vector<int> shape = {est.blocks_per_axis(), est.blocks_per_axis()};
  PersistenceDiagram mine = build_filtration(est.values(), shape).persistence();
  PersistenceDiagram oracle = true_diagram_oracle(spec, n);
  CHECK(bottleneck_all_degrees(mine, oracle) == 0.0);
}

TEST_CASE("persistence time grows with resolution") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kTiming;
  cfg.signal = CosSineDisc{};
  cfg.resolutions = {10, 200};
  cfg.repetitions = 10;
  cfg.prefactor = 0.25;
  cfg.oracle_n = 400;
  ExperimentReport rep = run_timing(cfg);
  // compare the per-resolution minima; scheduler hiccups only add time
  double small = INFINITY, large = INFINITY;
  for (const RawRow& r : rep.rows) {
    if (r.resolution == 10) small = std::min(small, r.time_s);
    else large = std::min(large, r.time_s);
  }
  CHECK(large > small);
}

TEST_CASE("concentration tails decay and the fitted slope is negative") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kConcentration;
  cfg.signal = CosSineDisc{};
  cfg.resolutions = {150};
  cfg.sigma = 0.1;
  cfg.prefactor = 0.1;
  cfg.repetitions = 200;
  cfg.master_seed = 42;
  cfg.oracle_n = 800;
  ExperimentReport rep = run_concentration(cfg);
  REQUIRE(rep.fits.size() == 1);
  CHECK(rep.fits[0].slope < 0.0);
  CHECK(rep.fits[0].points_used >= 2);
  // tail values decrease along the t grid and start at 1 for t below the data
  REQUIRE(!rep.tails.empty());
  double prev = 1.0 + 1e-9;
  for (const TailRow& row : rep.tails) {
    CHECK(row.tail <= prev);
    prev = row.tail;
  }

  // Monte Carlo consistency across repetition counts: the r=100 estimate of
  // one tail point sits within a few binomial standard errors of the r=200 one
  ExperimentConfig half = cfg;
  half.repetitions = 100;
  ExperimentReport rep_half = run_concentration(half);
  double t_probe = rep.tails[rep.tails.size() / 2].t;
  auto tail_at = [&](const ExperimentReport& r, double h_alpha_t) {
    double best = 1.0;
    double gap = 1e18;
    for (const TailRow& row : r.tails)
      if (std::abs(row.t - h_alpha_t) < gap) {
        gap = std::abs(row.t - h_alpha_t);
        best = row.tail;
      }
    return best;
  };
  double p_full = tail_at(rep, t_probe);
  double p_half = tail_at(rep_half, t_probe);
  double se = std::sqrt(std::max(p_full * (1 - p_full), 0.25 / 200.0) / 100.0);
  CHECK(std::abs(p_half - p_full) <= 5.0 * se + 0.05);
}

TEST_CASE("lower bound runner checks out on a small grid") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kLowerBoundKl;
  cfg.lower_bound.resolutions = {50, 100};
  cfg.lower_bound.windows = {0.2, 0.1};
  cfg.lower_bound.sigma = 1.0;
  ExperimentReport report = run_lower_bound_kl(cfg);
  // 4 + 9 interior bumps per resolution
  CHECK(report.kl_rows.size() == 2 * (4 + 9));
  CHECK(report.kl_averages.size() == 4);
  for (const KlRow& r : report.kl_rows) {
    CHECK(r.kl >= 0.0);
    CHECK(r.separation > 0.0);
  }
  // halving the window at fixed n lowers the averaged divergence
  for (int n : cfg.lower_bound.resolutions) {
    double wide = -1.0, narrow = -1.0;
    for (const KlAverageRow& r : report.kl_averages) {
      if (r.resolution == n && r.window == 0.2) wide = r.average;
      if (r.resolution == n && r.window == 0.1) narrow = r.average;
    }
    CHECK(narrow < wide);
  }
}

TEST_CASE("noise tail runner emits empirical tails under the bound") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kNoiseTail;
  cfg.resolutions = {24};
  cfg.block_override = 6;
  cfg.noise_dim = 2;
  cfg.repetitions = 300;
  cfg.t_grid = {1.0, 1.5};
  cfg.master_seed = 4;
  ExperimentReport report = run_noise_tail(cfg);
  REQUIRE(report.noise_tail_rows.size() == 2);
  for (const NoiseTailRow& r : report.noise_tail_rows) {
    CHECK(r.reps == 300);
    CHECK(r.empirical <= 1.0);
    CHECK(r.bound > 0.0);
  }
}
