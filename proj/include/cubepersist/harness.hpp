#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubepersist/diagram.hpp"
#include "cubepersist/signals.hpp"

namespace cubepersist {

enum class ExperimentKind {
  kConvergence,
  kConcentration,
  kLowerBoundKl,
  kSandwich,
  kTiming,
  kNoiseTail,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Declarative description of one simulation run. Parsed from JSON; see the
/// README for the schema and shipped examples.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kConvergence;
  SignalSpec signal = CosSineDisc{};
  std::vector<double> alphas;  // empty: use the signal's own alpha
  std::vector<int> resolutions;
  double sigma = 0.1;
  double prefactor = 0.1;
  int repetitions = 1;
  std::uint64_t master_seed = 42;
  int oracle_n = 800;
  std::string output_dir;
  int threads = 0;    // 0: automatic
  int block_override = 0;  // >0: fixed block size instead of calibration
  std::vector<double> lambdas;  // sandwich levels
  std::vector<double> t_grid;   // concentration / noise-tail thresholds
  int noise_dim = 2;            // noise-tail grid dimension

  struct LowerBoundGrid {
    double amplitude = 1.0;
    double lipschitz = 1.0;
    double alpha = 1.0;
    int dim = 1;
    double sigma = 1.0;
    std::vector<int> resolutions;
    std::vector<double> windows;
  } lower_bound;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws std::invalid_argument on contract violations.
  void validate() const;
};

struct RawRow {
  double alpha = 0.0;
  int resolution = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double bottleneck = 0.0;
  double supnorm = 0.0;
  double time_s = 0.0;
};

struct TailRow {
  double alpha = 0.0;
  int resolution = 0;
  double t = 0.0;
  double tail = 0.0;
};

struct FitRow {
  double alpha = 0.0;
  int resolution = 0;
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
};

struct KlRow {
  int resolution = 0;
  double window = 0.0;
  int bump_index = 0;
  double kl = 0.0;
  double separation = 0.0;       // bottleneck distance between closed forms
  double persistence_gap = 0.0;  // lifetime of the distinguishing feature
};

struct KlAverageRow {
  int resolution = 0;
  double window = 0.0;
  double average = 0.0;  // (1/((c-2) log(c-2))) * sum_m KL, c = floor(1/h)
};

struct NoiseTailRow {
  double t = 0.0;
  std::int64_t exceedances = 0;
  std::int64_t reps = 0;
  double empirical = 0.0;
  double bound = 0.0;  // 2 h^{-d} exp(-t^2 log(1/h^d))
};

struct SandwichRow {
  double lambda = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  bool inner_ok = true;
  bool outer_ok = true;
  bool calibration_ok = true;
  double nh = 0.0;
  double level_shift = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RawRow> rows;
  std::vector<TailRow> tails;
  std::vector<FitRow> fits;
  std::vector<KlRow> kl_rows;
  std::vector<KlAverageRow> kl_averages;
  std::vector<NoiseTailRow> noise_tail_rows;
  std::vector<SandwichRow> sandwich_rows;
  std::string config_hash;

  std::string raw_csv() const;
  std::string summary_csv() const;
};

ExperimentReport run_convergence(const ExperimentConfig& cfg);
ExperimentReport run_concentration(const ExperimentConfig& cfg);
ExperimentReport run_lower_bound_kl(const ExperimentConfig& cfg);
ExperimentReport run_timing(const ExperimentConfig& cfg);
ExperimentReport run_sandwich(const ExperimentConfig& cfg);
ExperimentReport run_noise_tail(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Hash over every emitted table; invariant under thread count.
std::uint64_t report_hash(const ExperimentReport& report);

/// True diagram for a spec: closed form when available, otherwise the cached
/// oracle pipeline at oracle_n. The cache is content-addressed under
/// $CUBEPERSIST_CACHE_DIR (or a temp-dir default).
PersistenceDiagram truth_diagram(const SignalSpec& spec, int oracle_n);
std::filesystem::path oracle_cache_dir();

/// One-sided Clopper-Pearson confidence bounds for a binomial proportion.
double clopper_pearson_upper(std::int64_t successes, std::int64_t trials,
                             double confidence);
double clopper_pearson_lower(std::int64_t successes, std::int64_t trials,
                             double confidence);

}  // namespace cubepersist
