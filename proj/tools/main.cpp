#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mpemba/amplitude.hpp"
#include "mpemba/config.hpp"
#include "mpemba/output.hpp"
#include "mpemba/schedule.hpp"
#include "mpemba/simulate.hpp"

namespace {

using namespace mpemba;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string formats;
  bool quiet = false;
};

struct Loaded {
  ExperimentConfig cfg;
  Grid grid;
};

Loaded load(const CliOptions& cli) {
  Loaded l{load_experiment_config(cli.config_path), {}};
  if (!cli.out_dir.empty()) l.cfg.output.directory = cli.out_dir;
  if (!cli.formats.empty()) {
    l.cfg.output.csv = l.cfg.output.json = l.cfg.output.svg = false;
    std::stringstream ss(cli.formats);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "csv") {
        l.cfg.output.csv = true;
      } else if (item == "json") {
        l.cfg.output.json = true;
      } else if (item == "svg") {
        l.cfg.output.svg = true;
      } else {
        throw ConfigError("unknown format '" + item + "' (expected csv, json or svg)");
      }
    }
  }
  l.cfg.landscape.validate();
  l.grid = Grid::make(l.cfg.landscape.y_min, l.cfg.landscape.y_max, l.cfg.grid_points);
  std::filesystem::create_directories(l.cfg.output.directory);
  return l;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output.directory) / name).string();
}

void note(const CliOptions& cli, const std::string& msg) {
  if (!cli.quiet) std::cout << msg << '\n';
}

/// Curvature and log-slope at the river position (argmin of c on the grid).
std::pair<double, double> river_point(const LandscapeSpec& spec, const Grid& grid) {
  double c_best = std::numeric_limits<double>::infinity();
  double a_ref = 1.0, k_ref = 0.0, y_ref = grid.nodes.front();
  for (double y : grid.nodes) {
    const LandscapeEval e = evaluate_landscape(spec, y);
    if (e.c < c_best) {
      c_best = e.c;
      a_ref = e.a;
      k_ref = e.da_dy / (2.0 * e.a);
      y_ref = y;
    }
  }
  (void)y_ref;
  return {a_ref, k_ref};
}

struct AnalysisArtifacts {
  SpectralDecomposition decomp;
  AmplitudeCurve curve;
  MpembaReport report;
};

AnalysisArtifacts run_analysis(const ExperimentConfig& cfg, const Grid& grid) {
  if (!cfg.scan) {
    throw ConfigError("config error at 'scan': the analyze step needs a scan block");
  }
  const FreeEnergyField field = effective_free_energy(cfg.landscape, grid, cfg.eta_b);
  AnalysisArtifacts art{eigendecompose(field, grid, 6), {}, {}};
  art.curve = scan_amplitude(art.decomp, cfg.landscape, grid, cfg.scan->eta_min,
                             cfg.scan->eta_max, cfg.scan->n_samples);
  art.report = find_strong_points(art.curve, art.decomp, cfg.landscape, grid);
  return art;
}

int cmd_analyze(const CliOptions& cli) {
  Loaded l = load(cli);
  AnalysisArtifacts art = run_analysis(l.cfg, l.grid);
  if (l.cfg.output.csv) {
    write_text_file(out_path(l.cfg, "eigenvalues.csv"), eigenvalue_table_csv(art.decomp));
    write_text_file(out_path(l.cfg, "amplitude.csv"), amplitude_curve_csv(art.curve));
  }
  if (l.cfg.output.json) {
    write_text_file(out_path(l.cfg, "report.json"),
                    amplitude_report_json(art.curve, art.report));
  }
  if (l.cfg.output.svg) {
    std::vector<PlotSeries> series{{"a2(eta)", "#1f6fb2", art.curve.eta_samples,
                                    art.curve.a2_values}};
    std::vector<PlotMarker> markers;
    for (const StrongPoint& sp : art.report.strong_points) markers.push_back({sp.eta, 0.0});
    write_text_file(out_path(l.cfg, "amplitude.svg"),
                    svg_line_plot("Mpemba amplitude", series, markers));
  }
  note(cli, "analyze: wrote outputs to " + l.cfg.output.directory);
  return 0;
}

int cmd_schedule(const CliOptions& cli) {
  Loaded l = load(cli);
  if (!l.cfg.schedule) {
    throw ConfigError("config error at 'schedule': missing block for the schedule command");
  }
  ScheduleBlock sb = *l.cfg.schedule;
  const auto [a_ref, k_ref] = river_point(l.cfg.landscape, l.grid);
  const double a = sb.a > 0.0 ? sb.a : a_ref;
  const double k = sb.k >= 0.0 ? sb.k : std::abs(k_ref);
  double eta_star = sb.eta_star;
  if (!(eta_star > 0.0)) {
    eta_star = run_analysis(l.cfg, l.grid).report.optimal_plateau;
  }
  SchedulePlan plan = recommended_schedule(eta_star, a, sb.warmup, k);
  const double horizon = sb.horizon > 0.0 ? sb.horizon : 10.0 / a;
  const ScheduleValidation validation =
      validate_schedule(plan, horizon, sb.n_check, sb.r_low, sb.r_high);
  if (l.cfg.output.json) {
    write_text_file(out_path(l.cfg, "schedule.json"), schedule_plan_json(plan, validation));
  }
  if (l.cfg.output.csv) {
    write_text_file(out_path(l.cfg, "schedule.csv"),
                    schedule_steps_csv(plan, sb.steps_per_unit_time));
  }
  if (l.cfg.output.svg) {
    std::vector<double> ts, etas;
    for (const auto& [t, eta] : plan.samples) {
      ts.push_back(t);
      etas.push_back(eta);
    }
    write_text_file(out_path(l.cfg, "schedule.svg"),
                    svg_line_plot("WSD schedule", {{"eta(t)", "#1f6fb2", ts, etas}}, {}));
  }
  note(cli, std::string("schedule: ") + (validation.all_pass ? "all checks pass" :
                                         "some decay checks fail (see report)"));
  return 0;
}

SimProtocol block_protocol(const SimBlock& sim) {
  if (sim.protocol_type == "quench") {
    return QuenchProtocol{sim.quench_eta_start, sim.protocol_eta, sim.quench_t};
  }
  return ConstantProtocol{sim.protocol_eta};
}

int cmd_simulate(const CliOptions& cli) {
  Loaded l = load(cli);
  if (!l.cfg.sim) {
    throw ConfigError("config error at 'sim': missing block for the simulate command");
  }
  SimBlock sim = *l.cfg.sim;
  if (sim.cfg.target_eta <= 0.0) sim.cfg.target_eta = l.cfg.eta_b;
  const SimProtocol protocol = block_protocol(sim);
  const bool two_d = sim.engine == MpembaExperimentOptions::Engine::kFull2d;
  const EnsembleResult result =
      two_d ? simulate(l.cfg.landscape, l.grid, protocol, sim.cfg)
            : simulate_effective_1d(l.cfg.landscape, l.grid, protocol, sim.cfg);
  if (l.cfg.output.csv) {
    write_text_file(out_path(l.cfg, "ensemble.csv"), ensemble_csv(result));
  }
  if (l.cfg.output.json) {
    write_text_file(out_path(l.cfg, "histograms.json"), ensemble_histograms_json(result));
  }
  if (l.cfg.output.svg && !result.distance_series.empty()) {
    write_text_file(out_path(l.cfg, "distance.svg"),
                    svg_line_plot("Distance to target",
                                  {{"L1", "#1f6fb2", result.times, result.distance_series}}, {},
                                  true));
  }
  note(cli, "simulate: wrote outputs to " + l.cfg.output.directory);
  return 0;
}

int cmd_mpemba_experiment(const CliOptions& cli) {
  Loaded l = load(cli);
  if (!l.cfg.sim) {
    throw ConfigError("config error at 'sim': missing block for mpemba-experiment");
  }
  const SimBlock& sim = *l.cfg.sim;
  if (!(sim.eta_h > 0.0) || !(sim.eta_l > 0.0)) {
    throw ConfigError("config error at 'sim.eta_h': mpemba-experiment needs eta_h and eta_l");
  }
  MpembaExperimentOptions opts;
  opts.engine = sim.engine;
  const MpembaComparison cmp =
      mpemba_experiment(l.cfg.landscape, l.grid, sim.eta_h, sim.eta_l, l.cfg.eta_b, sim.cfg, opts);
  if (l.cfg.output.json) {
    write_text_file(out_path(l.cfg, "mpemba.json"), mpemba_comparison_json(cmp));
  }
  if (l.cfg.output.csv) {
    write_text_file(out_path(l.cfg, "hot.csv"), ensemble_csv(cmp.hot));
    write_text_file(out_path(l.cfg, "cold.csv"), ensemble_csv(cmp.cold));
  }
  if (l.cfg.output.svg) {
    write_text_file(
        out_path(l.cfg, "mpemba.svg"),
        svg_line_plot("Mpemba experiment",
                      {{"hot", "#c23b22", cmp.hot.times, cmp.hot.distance_series},
                       {"cold", "#1f6fb2", cmp.cold.times, cmp.cold.distance_series}},
                      {}, true));
  }
  note(cli, "mpemba-experiment: verdict " + cmp.verdict);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Valley-river landscape analysis and WSD schedule toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions cli;
  app.add_option("--config", cli.config_path, "Experiment config file (JSON)");
  app.add_option("--out", cli.out_dir, "Output directory (overrides config)");
  app.add_option("--format", cli.formats, "Comma-separated output formats: csv,json,svg");
  app.add_flag("--quiet", cli.quiet, "Suppress progress messages");

  auto* analyze = app.add_subcommand("analyze", "Spectral decomposition and amplitude scan");
  auto* schedule = app.add_subcommand("schedule", "Synthesize and validate a WSD schedule");
  auto* simulate = app.add_subcommand("simulate", "Run a Langevin ensemble simulation");
  auto* experiment =
      app.add_subcommand("mpemba-experiment", "Hot-vs-cold quench comparison");
  auto* presets = app.add_subcommand("presets", "Preset utilities");
  auto* presets_list = presets->add_subcommand("list", "List named landscape presets");
  presets->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets_list->parsed()) {
      for (const std::string& name : mpemba::preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (cli.config_path.empty()) {
      throw mpemba::ConfigError("--config is required for this subcommand");
    }
    if (analyze->parsed()) return cmd_analyze(cli);
    if (schedule->parsed()) return cmd_schedule(cli);
    if (simulate->parsed()) return cmd_simulate(cli);
    if (experiment->parsed()) return cmd_mpemba_experiment(cli);
  } catch (const mpemba::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const mpemba::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const mpemba::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mpemba::InvalidLandscapeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mpemba::ContractViolation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
