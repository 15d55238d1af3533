#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cubepersist/bottleneck.hpp"
#include "cubepersist/cubical.hpp"
#include "cubepersist/diagram.hpp"
#include "cubepersist/estimator.hpp"
#include "cubepersist/field_io.hpp"
#include "cubepersist/harness.hpp"

namespace {

using namespace cubepersist;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  return ExperimentConfig::from_json(j);
}

int run_config_command(const std::string& config_path,
                       std::initializer_list<ExperimentKind> allowed) {
  ExperimentConfig cfg = load_config(config_path);
  bool ok = false;
  for (ExperimentKind k : allowed) ok |= (cfg.kind == k);
  if (!ok)
    throw std::invalid_argument("config kind '" + to_string(cfg.kind) +
                                "' does not match this subcommand");
  if (cfg.output_dir.empty())
    throw std::invalid_argument("config: output_dir is required");
  ExperimentReport report = run_experiment(cfg);
  emit_report(report, cfg.output_dir);
  std::cout << "wrote " << cfg.output_dir << " (" << report.rows.size() << " raw rows)\n";
  if (cfg.kind == ExperimentKind::kNoiseTail) {
    for (const auto& r : report.noise_tail_rows)
      std::printf("t=%g empirical=%.3e bound=%.3e %s\n", r.t, r.empirical, r.bound,
                  r.empirical <= r.bound ? "ok" : "EXCEEDS");
  }
  if (cfg.kind == ExperimentKind::kSandwich) {
    std::int64_t holds = 0;
    for (const auto& r : report.sandwich_rows)
      if (r.inner_ok && r.outer_ok) ++holds;
    std::printf("inclusions hold in %lld of %zu checks\n",
                static_cast<long long>(holds), report.sandwich_rows.size());
  }
  return kExitOk;
}

int cmd_diagram(const std::string& field_path, int block, const std::string& out,
                const std::string& debug_cells) {
  ScalarField field = read_field(field_path);
  Bandwidth bw{block, field.grid().points_per_axis};
  BlockField est = block_average(field, bw);
  std::vector<int> shape(field.grid().dim, est.blocks_per_axis());
  CubicalFiltration filt = build_filtration(est.values(), shape);
  auto result = filt.persistence_with_pairs();
  result.diagram.write_csv(out);
  if (!debug_cells.empty()) {
    std::ofstream f(debug_cells);
    if (!f) throw std::runtime_error("cannot open for writing: " + debug_cells);
    f << "cell,dim,value,pair\n";
    for (std::int64_t c = 0; c < filt.num_cells(); ++c)
      f << c << ',' << filt.cell_dim(c) << ',' << filt.cell_value(c) << ','
        << result.pair_of[c] << '\n';
  }
  std::cout << "wrote " << out << " (" << result.diagram.size() << " points)\n";
  return kExitOk;
}

int cmd_bottleneck(const std::string& a_path, const std::string& b_path, int degree,
                   bool has_degree) {
  PersistenceDiagram a = PersistenceDiagram::read_csv(a_path);
  PersistenceDiagram b = PersistenceDiagram::read_csv(b_path);
  double d = has_degree ? bottleneck_distance(a, b, degree) : bottleneck_all_degrees(a, b);
  if (d == kInfiniteDeath) std::printf("inf\n");
  else std::printf("%.12g\n", d);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"persistence-diagram estimation from noisy grid signals"};
  app.require_subcommand(1);

  std::string config_path, field_path, out_path, debug_cells;
  std::string diag_a, diag_b;
  int block = 1;
  int degree = 0;

  auto* simulate = app.add_subcommand(
      "simulate", "run a convergence, concentration or timing experiment");
  simulate->add_option("--config", config_path, "experiment config JSON")->required();

  auto* diagram = app.add_subcommand("diagram", "block-average a field and compute its diagram");
  diagram->add_option("--field", field_path, "input field (.cpf)")->required();
  diagram->add_option("--block", block, "block size in grid points per axis")
      ->default_val(1);
  diagram->add_option("--out", out_path, "output diagram CSV")->required();
  diagram->add_option("--debug-cells", debug_cells, "optional cell-level dump CSV");

  auto* bottleneck = app.add_subcommand("bottleneck", "bottleneck distance of two diagram CSVs");
  bottleneck->add_option("a", diag_a, "first diagram CSV")->required();
  bottleneck->add_option("b", diag_b, "second diagram CSV")->required();
  auto* degree_opt = bottleneck->add_option("--degree", degree, "restrict to one degree");

  auto* lowerbound = app.add_subcommand("lowerbound", "KL divergences and diagram separations");
  lowerbound->add_option("--config", config_path, "experiment config JSON")->required();

  auto* noise_tail = app.add_subcommand("noise-tail", "Monte Carlo tail of the block noise statistic");
  noise_tail->add_option("--config", config_path, "experiment config JSON")->required();

  auto* sandwich = app.add_subcommand("sandwich", "two-sided sublevel inclusion check");
  sandwich->add_option("--config", config_path, "experiment config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed())
      return run_config_command(config_path,
                                {ExperimentKind::kConvergence,
                                 ExperimentKind::kConcentration,
                                 ExperimentKind::kTiming});
    if (diagram->parsed()) return cmd_diagram(field_path, block, out_path, debug_cells);
    if (bottleneck->parsed())
      return cmd_bottleneck(diag_a, diag_b, degree, degree_opt->count() > 0);
    if (lowerbound->parsed())
      return run_config_command(config_path, {ExperimentKind::kLowerBoundKl});
    if (noise_tail->parsed())
      return run_config_command(config_path, {ExperimentKind::kNoiseTail});
    if (sandwich->parsed())
      return run_config_command(config_path, {ExperimentKind::kSandwich});
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
