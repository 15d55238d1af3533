#include "cubepersist/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cubepersist/bottleneck.hpp"
#include "cubepersist/cubical.hpp"
#include "cubepersist/estimator.hpp"
#include "cubepersist/metrics.hpp"

namespace cubepersist {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int resolve_threads(int requested, std::int64_t tasks) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 2;
  int t = requested > 0 ? requested : std::min(hw, 8);
  return static_cast<int>(std::min<std::int64_t>(t, std::max<std::int64_t>(tasks, 1)));
}

/// Runs fn(task) for every task index on a small pool. The first exception
/// aborts the run and is rethrown; no repetition is silently skipped.
template <typename Fn>
void parallel_for(std::int64_t tasks, int threads, Fn&& fn) {
  threads = resolve_threads(threads, tasks);
  if (threads <= 1) {
    for (std::int64_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      std::int64_t i = next.fetch_add(1);
      if (i >= tasks) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Bandwidth pick_bandwidth(const ExperimentConfig& cfg, int n, int dim, double alpha) {
  if (cfg.block_override > 0)
    return Bandwidth{std::min(cfg.block_override, n), n};
  return calibrate_bandwidth(n, dim, alpha, cfg.prefactor);
}

bool has_closed_form(const SignalSpec& spec) {
  return std::holds_alternative<LowerBoundBase>(spec) ||
         std::holds_alternative<LowerBoundBump>(spec);
}

std::vector<double> effective_alphas(const ExperimentConfig& cfg) {
  if (!cfg.alphas.empty()) return cfg.alphas;
  return {get_alpha(cfg.signal)};
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                   static_cast<double>(v.size()));
}

struct PipelineOutcome {
  PersistenceDiagram diagram;
  BlockField est;
  double persistence_seconds = 0.0;
  std::uint64_t seed = 0;
};

PipelineOutcome run_pipeline(const ExperimentConfig& cfg, const ScalarField& clean,
                             int n, double alpha, const SeedStream& stream) {
  Rng rng(stream);
  NoiseModel noise{cfg.sigma};
  ScalarField obs = add_noise(clean, noise, rng);
  Bandwidth bw = pick_bandwidth(cfg, n, clean.grid().dim, alpha);
  BlockField est = block_average(obs, bw);
  std::vector<int> shape(clean.grid().dim, est.blocks_per_axis());
  auto t0 = std::chrono::steady_clock::now();
  CubicalFiltration filt = build_filtration(est.values(), shape);
  PersistenceDiagram dgm = filt.persistence();
  auto t1 = std::chrono::steady_clock::now();
  return PipelineOutcome{std::move(dgm), std::move(est),
                         std::chrono::duration<double>(t1 - t0).count(),
                         stream.leaf_seed()};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kConvergence: return "convergence";
    case ExperimentKind::kConcentration: return "concentration";
    case ExperimentKind::kLowerBoundKl: return "lower_bound_kl";
    case ExperimentKind::kSandwich: return "sandwich";
    case ExperimentKind::kTiming: return "timing";
    case ExperimentKind::kNoiseTail: return "noise_tail";
  }
  throw std::logic_error("unreachable experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "convergence") return ExperimentKind::kConvergence;
  if (name == "concentration") return ExperimentKind::kConcentration;
  if (name == "lower_bound_kl") return ExperimentKind::kLowerBoundKl;
  if (name == "sandwich") return ExperimentKind::kSandwich;
  if (name == "timing") return ExperimentKind::kTiming;
  if (name == "noise_tail") return ExperimentKind::kNoiseTail;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.kind = experiment_kind_from_string(j.value("kind", std::string("convergence")));
  if (j.contains("signal")) cfg.signal = signal_from_json(j.at("signal"));
  if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
  if (j.contains("resolutions"))
    cfg.resolutions = j.at("resolutions").get<std::vector<int>>();
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.prefactor = j.value("prefactor", cfg.prefactor);
  cfg.repetitions = j.value("repetitions", cfg.repetitions);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.oracle_n = j.value("oracle_n", cfg.oracle_n);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.block_override = j.value("block", cfg.block_override);
  if (j.contains("lambdas")) cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
  if (j.contains("t_grid")) cfg.t_grid = j.at("t_grid").get<std::vector<double>>();
  cfg.noise_dim = j.value("dim", cfg.noise_dim);
  if (j.contains("lower_bound")) {
    const auto& lb = j.at("lower_bound");
    cfg.lower_bound.amplitude = lb.value("amplitude", 1.0);
    cfg.lower_bound.lipschitz = lb.value("lipschitz", 1.0);
    cfg.lower_bound.alpha = lb.value("alpha", 1.0);
    cfg.lower_bound.dim = lb.value("dim", 1);
    cfg.lower_bound.sigma = lb.value("sigma", 1.0);
    if (lb.contains("resolutions"))
      cfg.lower_bound.resolutions = lb.at("resolutions").get<std::vector<int>>();
    if (lb.contains("windows"))
      cfg.lower_bound.windows = lb.at("windows").get<std::vector<double>>();
  }
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["signal"] = signal_to_json(signal);
  if (!alphas.empty()) j["alphas"] = alphas;
  j["resolutions"] = resolutions;
  j["sigma"] = sigma;
  j["prefactor"] = prefactor;
  j["repetitions"] = repetitions;
  j["master_seed"] = master_seed;
  j["oracle_n"] = oracle_n;
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  if (block_override > 0) j["block"] = block_override;
  if (!lambdas.empty()) j["lambdas"] = lambdas;
  if (!t_grid.empty()) j["t_grid"] = t_grid;
  j["dim"] = noise_dim;
  if (kind == ExperimentKind::kLowerBoundKl) {
    j["lower_bound"] = {{"amplitude", lower_bound.amplitude},
                        {"lipschitz", lower_bound.lipschitz},
                        {"alpha", lower_bound.alpha},
                        {"dim", lower_bound.dim},
                        {"sigma", lower_bound.sigma},
                        {"resolutions", lower_bound.resolutions},
                        {"windows", lower_bound.windows}};
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("config: sigma must be >= 0");
  if (!(prefactor > 0.0)) throw std::invalid_argument("config: prefactor must be > 0");
  bool needs_resolutions = kind != ExperimentKind::kLowerBoundKl;
  if (needs_resolutions) {
    if (resolutions.empty()) throw std::invalid_argument("config: resolutions required");
    for (std::size_t i = 0; i < resolutions.size(); ++i) {
      if (resolutions[i] < 2) throw std::invalid_argument("config: resolution < 2");
      if (i > 0 && resolutions[i] <= resolutions[i - 1])
        throw std::invalid_argument("config: resolutions must increase strictly");
    }
  }
  bool needs_oracle = kind == ExperimentKind::kConvergence ||
                      kind == ExperimentKind::kConcentration ||
                      kind == ExperimentKind::kSandwich;
  if (needs_oracle && oracle_n <= resolutions.back())
    throw std::invalid_argument("config: oracle_n must exceed the largest resolution");
  if (kind == ExperimentKind::kSandwich && lambdas.empty())
    throw std::invalid_argument("config: sandwich requires lambdas");
  if (kind == ExperimentKind::kNoiseTail) {
    if (block_override < 1)
      throw std::invalid_argument("config: noise_tail requires a fixed block size");
    if (t_grid.empty()) throw std::invalid_argument("config: noise_tail requires t_grid");
    if (noise_dim < 1 || noise_dim > 3)
      throw std::invalid_argument("config: dim must be 1, 2 or 3");
  }
  if (kind == ExperimentKind::kLowerBoundKl) {
    if (lower_bound.resolutions.empty() || lower_bound.windows.empty())
      throw std::invalid_argument("config: lower_bound grid required");
    if (!(lower_bound.sigma > 0.0))
      throw std::invalid_argument("config: lower_bound sigma must be > 0");
    for (double h : lower_bound.windows)
      if (window_count(h) < 4)
        throw std::invalid_argument(
            "config: lower_bound windows need floor(1/h) >= 4");
  }
  for (double a : alphas)
    if (!(a > 0.0) || !(a <= 1.0))
      throw std::invalid_argument("config: alphas must lie in (0,1]");
}

std::filesystem::path oracle_cache_dir() {
  if (const char* env = std::getenv("CUBEPERSIST_CACHE_DIR")) return env;
  return std::filesystem::temp_directory_path() / "cubepersist-oracle-cache";
}

PersistenceDiagram truth_diagram(const SignalSpec& spec, int oracle_n) {
  if (has_closed_form(spec)) return true_diagram_closed_form(spec);
  nlohmann::json key_json = signal_to_json(spec);
  std::string key_text = key_json.dump() + ":" + std::to_string(oracle_n) + ":v1";
  char key[24];
  std::snprintf(key, sizeof(key), "%016llx",
                static_cast<unsigned long long>(fnv1a(key_text)));
  std::filesystem::path dir = oracle_cache_dir();
  std::filesystem::create_directories(dir);
  std::filesystem::path file = dir / (std::string(key) + ".csv");
  if (std::filesystem::exists(file)) {
    try {
      return PersistenceDiagram::read_csv(file.string());
    } catch (const std::exception&) {
      // fall through and recompute a corrupt cache entry
    }
  }
  PersistenceDiagram dgm = true_diagram_oracle(spec, oracle_n);
  std::filesystem::path tmp = file;
  tmp += "." + std::to_string(
                   static_cast<unsigned long long>(fnv1a(key_text, 0x9e3779b9U))) +
         ".tmp";
  dgm.write_csv(tmp.string());
  std::filesystem::rename(tmp, file);
  return dgm;
}

ExperimentReport run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  std::vector<double> alphas = effective_alphas(cfg);
  const int reps = cfg.repetitions;
  report.rows.resize(alphas.size() * cfg.resolutions.size() * reps);
  SeedStream master(cfg.master_seed);

  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    SignalSpec spec = cfg.signal;
    set_alpha(spec, alphas[ai]);
    PersistenceDiagram truth = truth_diagram(spec, cfg.oracle_n);
    for (std::size_t ni = 0; ni < cfg.resolutions.size(); ++ni) {
      int n = cfg.resolutions[ni];
      GridSpec grid(dimension(spec), n);
      ScalarField clean = sample_on_grid(spec, grid);
      parallel_for(reps, cfg.threads, [&](std::int64_t rep) {
        SeedStream stream = master.derived(
            {static_cast<std::uint64_t>(cfg.kind == ExperimentKind::kConcentration ? 2 : 1),
             ai, ni, static_cast<std::uint64_t>(rep)});
        PipelineOutcome out =
            run_pipeline(cfg, clean, n, alphas[ai], stream);
        RawRow row;
        row.alpha = alphas[ai];
        row.resolution = n;
        row.rep = static_cast<int>(rep);
        row.seed = out.seed;
        row.bottleneck = bottleneck_all_degrees(out.diagram, truth);
        row.supnorm = sup_norm_error(spec, out.est, cfg.oracle_n);
        row.time_s = 0.0;  // timing belongs to the timing experiment
        report.rows[(ai * cfg.resolutions.size() + ni) * reps + rep] = row;
      });
    }
  }
  return report;
}

ExperimentReport run_concentration(const ExperimentConfig& cfg) {
  ExperimentReport report = run_convergence(cfg);
  // Rescale errors by h^alpha and tabulate the empirical upper tail.
  std::vector<double> alphas = effective_alphas(cfg);
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    for (int n : cfg.resolutions) {
      Bandwidth bw = pick_bandwidth(cfg, n, dimension(cfg.signal), alphas[ai]);
      double h_alpha = std::pow(bw.h(), alphas[ai]);
      std::vector<double> rescaled;
      for (const RawRow& row : report.rows)
        if (row.alpha == alphas[ai] && row.resolution == n)
          rescaled.push_back(row.bottleneck / h_alpha);
      std::vector<double> grid = cfg.t_grid;
      if (grid.empty()) {
        double lo = *std::min_element(rescaled.begin(), rescaled.end());
        double hi = *std::max_element(rescaled.begin(), rescaled.end());
        for (int i = 0; i < 10; ++i)
          grid.push_back(lo + (hi - lo) * (i + 0.5) / 10.0);
      }
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int used = 0;
      for (double t : grid) {
        std::int64_t count = 0;
        for (double v : rescaled)
          if (v >= t) ++count;
        double tail = static_cast<double>(count) / static_cast<double>(rescaled.size());
        report.tails.push_back({alphas[ai], n, t, tail});
        if (tail > 0.0 && tail < 1.0) {
          double x = t * t, y = std::log(tail);
          sx += x;
          sy += y;
          sxx += x * x;
          sxy += x * y;
          ++used;
        }
      }
      if (used >= 2) {
        double denom = used * sxx - sx * sx;
        double slope = (used * sxy - sx * sy) / denom;
        double intercept = (sy - slope * sx) / used;
        report.fits.push_back({alphas[ai], n, slope, intercept, used});
      }
    }
  }
  return report;
}

ExperimentReport run_lower_bound_kl(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  const auto& lb = cfg.lower_bound;
  LowerBoundBase base{lb.amplitude, lb.lipschitz, lb.alpha, lb.dim};
  for (int n : lb.resolutions) {
    GridSpec grid(lb.dim, n);
    for (double h : lb.windows) {
      int count = window_count(h);
      double sum_kl = 0.0;
      for (int m = 1; m < count; ++m) {
        LowerBoundBump bump{lb.amplitude, lb.lipschitz, lb.alpha, lb.dim, h, m};
        double kl = kl_product_gaussians(bump, base, grid, lb.sigma);
        PersistenceDiagram d0 = true_diagram_closed_form(base);
        PersistenceDiagram dm = true_diagram_closed_form(bump);
        double sep = bottleneck_all_degrees(d0, dm);
        double gap = 0.0;
        for (const auto& p : dm.points())
          if (!p.essential()) gap = std::max(gap, p.persistence());
        report.kl_rows.push_back({n, h, m, kl, sep, gap});
        sum_kl += kl;
      }
      double denom = (count - 2) * std::log(static_cast<double>(count - 2));
      report.kl_averages.push_back({n, h, denom > 0.0 ? sum_kl / denom : 0.0});
    }
  }
  return report;
}

ExperimentReport run_timing(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  std::vector<double> alphas = effective_alphas(cfg);
  const int reps = cfg.repetitions;
  report.rows.resize(alphas.size() * cfg.resolutions.size() * reps);
  SeedStream master(cfg.master_seed);
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    SignalSpec spec = cfg.signal;
    set_alpha(spec, alphas[ai]);
    for (std::size_t ni = 0; ni < cfg.resolutions.size(); ++ni) {
      int n = cfg.resolutions[ni];
      GridSpec grid(dimension(spec), n);
      ScalarField clean = sample_on_grid(spec, grid);
      // Timing stays serial: concurrent repetitions would contend for cores.
      for (int rep = 0; rep < reps; ++rep) {
        SeedStream stream = master.derived(
            {5, ai, ni, static_cast<std::uint64_t>(rep)});
        PipelineOutcome out = run_pipeline(cfg, clean, n, alphas[ai], stream);
        RawRow row;
        row.alpha = alphas[ai];
        row.resolution = n;
        row.rep = rep;
        row.seed = out.seed;
        row.bottleneck = 0.0;
        row.supnorm = 0.0;
        row.time_s = out.persistence_seconds;
        report.rows[(ai * cfg.resolutions.size() + ni) * reps + rep] = row;
      }
    }
  }
  return report;
}

ExperimentReport run_sandwich(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  const int reps = cfg.repetitions;
  const SignalSpec& spec = cfg.signal;
  const int n = cfg.resolutions.back();
  GridSpec grid(dimension(spec), n);
  ScalarField clean = sample_on_grid(spec, grid);
  Bandwidth bw = pick_bandwidth(cfg, n, grid.dim, get_alpha(spec));
  SeedStream master(cfg.master_seed);
  report.sandwich_rows.resize(cfg.lambdas.size() * reps);
  parallel_for(static_cast<std::int64_t>(cfg.lambdas.size()) * reps, cfg.threads,
               [&](std::int64_t task) {
                 std::size_t li = static_cast<std::size_t>(task) / reps;
                 int rep = static_cast<int>(task % reps);
                 SeedStream stream =
                     master.derived({4, li, static_cast<std::uint64_t>(rep)});
                 Rng rng(stream);
                 NoiseModel noise{cfg.sigma};
                 ScalarField obs = add_noise(clean, noise, rng);
                 SandwichReport sr =
                     sandwich_check(spec, obs, bw, cfg.lambdas[li], cfg.oracle_n);
                 SandwichRow row;
                 row.lambda = cfg.lambdas[li];
                 row.rep = rep;
                 row.seed = stream.leaf_seed();
                 row.inner_ok = sr.inner_ok;
                 row.outer_ok = sr.outer_ok;
                 row.calibration_ok = sr.calibration_ok;
                 row.nh = sr.nh;
                 row.level_shift = sr.level_shift;
                 report.sandwich_rows[task] = row;
               });
  return report;
}

ExperimentReport run_noise_tail(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  const int n = cfg.resolutions.back();
  const int dim = cfg.noise_dim;
  GridSpec grid(dim, n);
  Bandwidth bw{cfg.block_override, n};
  const int reps = cfg.repetitions;
  std::vector<double> stats(reps);
  SeedStream master(cfg.master_seed);
  parallel_for(reps, cfg.threads, [&](std::int64_t rep) {
    Rng rng(master.derived({6, static_cast<std::uint64_t>(rep)}));
    std::vector<double> values(grid.sample_count());
    for (double& v : values) v = rng.normal();
    ScalarField noise_field(grid, std::move(values));
    stats[rep] = noise_statistic(noise_field, bw).value;
  });
  double h = bw.h();
  double log_term = std::log(1.0 / std::pow(h, dim));
  for (double t : cfg.t_grid) {
    std::int64_t count = 0;
    for (double v : stats)
      if (v >= t) ++count;
    NoiseTailRow row;
    row.t = t;
    row.exceedances = count;
    row.reps = reps;
    row.empirical = static_cast<double>(count) / reps;
    row.bound = 2.0 * std::pow(1.0 / h, dim) * std::exp(-t * t * log_term);
    report.noise_tail_rows.push_back(row);
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::kConvergence: return run_convergence(cfg);
    case ExperimentKind::kConcentration: return run_concentration(cfg);
    case ExperimentKind::kLowerBoundKl: return run_lower_bound_kl(cfg);
    case ExperimentKind::kSandwich: return run_sandwich(cfg);
    case ExperimentKind::kTiming: return run_timing(cfg);
    case ExperimentKind::kNoiseTail: return run_noise_tail(cfg);
  }
  throw std::logic_error("unreachable experiment kind");
}

std::string ExperimentReport::raw_csv() const {
  std::ostringstream os;
  os << "kind,alpha,N,rep,seed,bottleneck,supnorm,time_s\n";
  std::string kind = to_string(config.kind);
  for (const RawRow& r : rows) {
    os << kind << ',' << fmt_short(r.alpha) << ',' << r.resolution << ',' << r.rep << ','
       << r.seed << ',' << fmt(r.bottleneck) << ',' << fmt(r.supnorm) << ','
       << (config.kind == ExperimentKind::kTiming ? fmt(r.time_s) : fmt(0.0)) << '\n';
  }
  return os.str();
}

std::string ExperimentReport::summary_csv() const {
  std::map<std::pair<double, int>, std::vector<const RawRow*>> groups;
  for (const RawRow& r : rows) groups[{r.alpha, r.resolution}].push_back(&r);
  std::ostringstream os;
  os << "kind,alpha,N,reps,mean_bottleneck,stderr_bottleneck,mean_supnorm,"
        "stderr_supnorm,mean_time_s\n";
  std::string kind = to_string(config.kind);
  for (const auto& [key, members] : groups) {
    std::vector<double> bn, sn, ts;
    for (const RawRow* r : members) {
      bn.push_back(r->bottleneck);
      sn.push_back(r->supnorm);
      ts.push_back(config.kind == ExperimentKind::kTiming ? r->time_s : 0.0);
    }
    os << kind << ',' << fmt_short(key.first) << ',' << key.second << ','
       << members.size() << ',' << fmt(mean_of(bn)) << ',' << fmt(stderr_of(bn)) << ','
       << fmt(mean_of(sn)) << ',' << fmt(stderr_of(sn)) << ',' << fmt(mean_of(ts))
       << '\n';
  }
  return os.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("emit_report: cannot create directory " + dir.string());

  auto write_text = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("emit_report: cannot write " + p.string());
    f << text;
  };

  write_text(dir / "raw.csv", report.raw_csv());
  write_text(dir / "summary.csv", report.summary_csv());
  {
    nlohmann::json echo = report.config.to_json();
    echo["config_hash"] = report.config_hash.empty()
                              ? std::to_string(report_hash(report))
                              : report.config_hash;
    write_text(dir / "config.json", echo.dump(2) + "\n");
  }

  // Plot-ready series: one file per alpha and metric, x = N.
  std::filesystem::create_directories(dir / "plotdata");
  std::map<double, std::map<int, std::vector<const RawRow*>>> by_alpha;
  for (const RawRow& r : report.rows) by_alpha[r.alpha][r.resolution].push_back(&r);
  for (const auto& [alpha, by_n] : by_alpha) {
    std::ostringstream bn, sn;
    bn << "N,mean_bottleneck,stderr\n";
    sn << "N,mean_supnorm,stderr\n";
    for (const auto& [n, members] : by_n) {
      std::vector<double> b, s;
      for (const RawRow* r : members) {
        b.push_back(r->bottleneck);
        s.push_back(r->supnorm);
      }
      bn << n << ',' << fmt(mean_of(b)) << ',' << fmt(stderr_of(b)) << '\n';
      sn << n << ',' << fmt(mean_of(s)) << ',' << fmt(stderr_of(s)) << '\n';
    }
    write_text(dir / "plotdata" / ("bottleneck_alpha_" + fmt_short(alpha) + ".csv"),
               bn.str());
    write_text(dir / "plotdata" / ("supnorm_alpha_" + fmt_short(alpha) + ".csv"),
               sn.str());
  }

  if (!report.tails.empty()) {
    std::ostringstream os;
    os << "alpha,N,t,tail\n";
    for (const TailRow& r : report.tails)
      os << fmt_short(r.alpha) << ',' << r.resolution << ',' << fmt(r.t) << ','
         << fmt(r.tail) << '\n';
    write_text(dir / "tails.csv", os.str());
  }
  if (!report.fits.empty()) {
    std::ostringstream os;
    os << "alpha,N,slope,intercept,points_used\n";
    for (const FitRow& r : report.fits)
      os << fmt_short(r.alpha) << ',' << r.resolution << ',' << fmt(r.slope) << ','
         << fmt(r.intercept) << ',' << r.points_used << '\n';
    write_text(dir / "fit.csv", os.str());
  }
  if (!report.kl_rows.empty()) {
    std::ostringstream os;
    os << "N,h,m,kl,separation,persistence_gap\n";
    for (const KlRow& r : report.kl_rows)
      os << r.resolution << ',' << fmt(r.window) << ',' << r.bump_index << ','
         << fmt(r.kl) << ',' << fmt(r.separation) << ',' << fmt(r.persistence_gap)
         << '\n';
    write_text(dir / "kl.csv", os.str());
  }
  if (!report.kl_averages.empty()) {
    std::ostringstream os;
    os << "N,h,eq6_average\n";
    for (const KlAverageRow& r : report.kl_averages)
      os << r.resolution << ',' << fmt(r.window) << ',' << fmt(r.average) << '\n';
    write_text(dir / "kl_averages.csv", os.str());
  }
  if (!report.noise_tail_rows.empty()) {
    std::ostringstream os;
    os << "t,exceedances,reps,empirical,bound\n";
    for (const NoiseTailRow& r : report.noise_tail_rows)
      os << fmt(r.t) << ',' << r.exceedances << ',' << r.reps << ','
         << fmt(r.empirical) << ',' << fmt(r.bound) << '\n';
    write_text(dir / "noise_tail.csv", os.str());
  }
  if (!report.sandwich_rows.empty()) {
    std::ostringstream os;
    os << "lambda,rep,seed,inner_ok,outer_ok,calibration_ok,nh,level_shift\n";
    for (const SandwichRow& r : report.sandwich_rows)
      os << fmt_short(r.lambda) << ',' << r.rep << ',' << r.seed << ','
         << int(r.inner_ok) << ',' << int(r.outer_ok) << ',' << int(r.calibration_ok)
         << ',' << fmt(r.nh) << ',' << fmt(r.level_shift) << '\n';
    write_text(dir / "sandwich.csv", os.str());
  }
}

std::uint64_t report_hash(const ExperimentReport& report) {
  std::uint64_t h = fnv1a(report.raw_csv());
  h = fnv1a(report.summary_csv(), h);
  std::ostringstream extras;
  for (const TailRow& r : report.tails)
    extras << r.alpha << ' ' << r.resolution << ' ' << r.t << ' ' << r.tail << '\n';
  for (const KlRow& r : report.kl_rows)
    extras << r.resolution << ' ' << r.window << ' ' << r.bump_index << ' ' << r.kl
           << ' ' << r.separation << '\n';
  for (const NoiseTailRow& r : report.noise_tail_rows)
    extras << r.t << ' ' << r.exceedances << '\n';
  for (const SandwichRow& r : report.sandwich_rows)
    extras << r.lambda << ' ' << r.rep << ' ' << r.inner_ok << r.outer_ok << ' '
           << r.nh << '\n';
  return fnv1a(extras.str(), h);
}

namespace {

// P(Bin(trials, p) <= k), evaluated in log space.
double binomial_cdf(std::int64_t k, std::int64_t trials, double p) {
  double log_p = std::log(p), log_q = std::log1p(-p);
  double sum = 0.0;
  for (std::int64_t i = 0; i <= k; ++i) {
    double log_c = std::lgamma(static_cast<double>(trials) + 1.0) -
                   std::lgamma(static_cast<double>(i) + 1.0) -
                   std::lgamma(static_cast<double>(trials - i) + 1.0);
    sum += std::exp(log_c + i * log_p + (trials - i) * log_q);
  }
  return std::min(sum, 1.0);
}

}  // namespace

double clopper_pearson_upper(std::int64_t successes, std::int64_t trials,
                             double confidence) {
  if (trials <= 0) throw std::invalid_argument("clopper_pearson_upper: trials <= 0");
  if (successes >= trials) return 1.0;
  // Smallest p with P(Bin(n,p) <= k) <= 1 - confidence.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= 0.0 || mid >= 1.0) break;
    if (binomial_cdf(successes, trials, mid) > 1.0 - confidence) lo = mid;
    else hi = mid;
  }
  return hi;
}

double clopper_pearson_lower(std::int64_t successes, std::int64_t trials,
                             double confidence) {
  if (trials <= 0) throw std::invalid_argument("clopper_pearson_lower: trials <= 0");
  if (successes <= 0) return 0.0;
  // Largest p with P(Bin(n,p) >= k) <= 1 - confidence.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= 0.0 || mid >= 1.0) break;
    if (binomial_cdf(successes - 1, trials, mid) < confidence) hi = mid;
    else lo = mid;
  }
  return lo;
}

}  // namespace cubepersist
