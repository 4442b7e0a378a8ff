// Command-line front end: seeded topology generation, outage heatmaps, ABOT
// parameter sweeps, and the closed-form-vs-Monte-Carlo validation suite. All
// outputs are plain CSV / text and byte-stable for a fixed config.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mbsfn/config.hpp"
#include "mbsfn/errors.hpp"
#include "mbsfn/format.hpp"
#include "mbsfn/mc.hpp"
#include "mbsfn/metrics.hpp"
#include "mbsfn/rng.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitValidationFailure = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::string out_dir = ".";
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")->required();
  cmd->add_option("--seed", args.seed_override, "override experiment.seed");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
}

mbsfn::RunConfig load_config(const CommonArgs& args) {
  mbsfn::RunConfig cfg = mbsfn::parse_config_file(args.config_path);
  if (args.seed_override) cfg.seed = *args.seed_override;
  return cfg;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path.string());
  return out;
}

mbsfn::NetworkTopology topology_from_config(const mbsfn::RunConfig& cfg) {
  const auto params = cfg.experiment_params();
  return mbsfn::place_base_stations(params.resolved_station_count(), params.d_net, params.r_bs,
                                    cfg.seed, params.placement_attempts);
}

int count_populated_areas(const mbsfn::MbsfnPartition& partition) {
  std::vector<char> seen(partition.anchors.size(), 0);
  int areas = 0;
  for (int a : partition.area_of_station) {
    if (!seen[static_cast<std::size_t>(a)]) {
      seen[static_cast<std::size_t>(a)] = 1;
      ++areas;
    }
  }
  return areas;
}

int cmd_generate_topology(const CommonArgs& args) {
  const mbsfn::RunConfig cfg = load_config(args);
  const mbsfn::NetworkTopology topo = topology_from_config(cfg);
  const auto partition = mbsfn::assign_mbsfn_areas(
      topo, mbsfn::hex_grid_centers(cfg.d_net, cfg.d_sfn), cfg.d_sfn, cfg.resolved_d_max());
  auto out = open_output(args.out_dir, "topology.txt");
  mbsfn::save_topology(topo, out);
  std::cout << "generate-topology: M=" << topo.stations.size()
            << " min_pairwise_distance=" << mbsfn::format_double(mbsfn::min_pairwise_distance(topo))
            << " populated_areas=" << count_populated_areas(partition)
            << " attempts=" << topo.placement_attempts << "\n";
  return 0;
}

int cmd_outage_map(const CommonArgs& args, const std::string& topology_path,
                   const std::string& shadowing_dump) {
  mbsfn::RunConfig cfg = load_config(args);
  mbsfn::NetworkTopology topo;
  if (!topology_path.empty()) {
    std::ifstream in(topology_path);
    if (!in) throw mbsfn::ConfigError("cannot open topology file '" + topology_path + "'");
    topo = mbsfn::load_topology(in);
    cfg.d_net = topo.d_net;
  } else {
    topo = topology_from_config(cfg);
  }
  const auto params = cfg.experiment_params();
  const auto partition = mbsfn::assign_mbsfn_areas(
      topo, mbsfn::hex_grid_centers(cfg.d_net, cfg.d_sfn), cfg.d_sfn, cfg.resolved_d_max());
  const auto grid = mbsfn::evaluation_grid(cfg.d_net, cfg.spacing, cfg.eval_side);

  mbsfn::ShadowingField field;
  const mbsfn::ShadowingField* field_ptr = nullptr;
  if (cfg.sigma_s_db > 0.0) {
    mbsfn::ShadowingModel model(grid, cfg.d_corr);
    field = model.generate(static_cast<int>(topo.stations.size()), cfg.sigma_s_db,
                           mbsfn::derive_seed(cfg.seed, 0, 2), args.threads);
    field_ptr = &field;
  }
  if (!shadowing_dump.empty() && field_ptr != nullptr) {
    auto out = open_output(args.out_dir, shadowing_dump);
    mbsfn::save_shadowing_csv(field, out);
  }

  mbsfn::ChannelParams ch = params.channel;
  if (params.r_f_tracks_r_bs) ch.r_f = params.r_bs;
  const auto profile = mbsfn::build_profile(topo, partition, grid, field_ptr, ch, args.threads);
  mbsfn::OutageMapOptions options;
  options.threads = args.threads;
  const auto map = mbsfn::outage_map(profile, grid, params.beta_lin, params.gamma_lin, options);

  auto out = open_output(args.out_dir, "outage_map.csv");
  out << "x,y,epsilon,area_index,below_threshold\n";
  for (std::size_t j = 0; j < grid.points.size(); ++j) {
    out << mbsfn::format_double(grid.points[j].x) << ',' << mbsfn::format_double(grid.points[j].y)
        << ',' << mbsfn::format_double(map.epsilon[j]) << ',' << map.serving[j] << ','
        << (map.epsilon[j] < cfg.eps_hat ? 1 : 0) << "\n";
  }
  std::cout << "outage-map: points=" << grid.points.size()
            << " empty_combining=" << map.empty_combining_points
            << " extended_precision=" << map.diagnostics.extended_precision
            << " clamped=" << map.diagnostics.clamped
            << " mc_fallbacks=" << map.mc_fallback_points << "\n";
  return 0;
}

std::string series_suffix(const std::string& key, double value) {
  return "_" + key + mbsfn::format_double(value);
}

int cmd_abot_sweep(const CommonArgs& args) {
  const mbsfn::RunConfig base_cfg = load_config(args);
  if (!base_cfg.sweep_axis) {
    throw mbsfn::ConfigError("abot-sweep requires experiment.sweep_axis");
  }
  if (base_cfg.sweep_values.empty()) {
    throw mbsfn::ConfigError("abot-sweep requires a non-empty experiment.sweep_values list");
  }

  std::vector<std::pair<std::string, mbsfn::RunConfig>> series;
  if (base_cfg.series_key) {
    for (double v : base_cfg.series_values) {
      series.emplace_back(series_suffix(*base_cfg.series_key, v),
                          mbsfn::with_series_value(base_cfg, *base_cfg.series_key, v));
    }
  } else {
    series.emplace_back("", base_cfg);
  }

  const std::string axis_name = mbsfn::sweep_axis_name(*base_cfg.sweep_axis);
  for (const auto& [suffix, cfg] : series) {
    mbsfn::SweepConfig sweep_cfg;
    sweep_cfg.base = cfg.experiment_params();
    sweep_cfg.axis = *cfg.sweep_axis;
    sweep_cfg.values = cfg.sweep_values;
    sweep_cfg.upsilon = cfg.upsilon;
    sweep_cfg.seed = cfg.seed;
    sweep_cfg.threads = args.threads;
    const mbsfn::AbotCurve curve = mbsfn::sweep(sweep_cfg);

    auto out = open_output(args.out_dir, "abot_" + axis_name + suffix + ".csv");
    out << "axis_value,realization,abot\n";
    for (std::size_t v = 0; v < curve.values.size(); ++v) {
      for (std::size_t t = 0; t < curve.abot[v].size(); ++t) {
        if (std::isnan(curve.abot[v][t])) continue;
        out << mbsfn::format_double(curve.values[v]) << ',' << t << ','
            << mbsfn::format_double(curve.abot[v][t]) << "\n";
      }
    }
    auto summary = open_output(args.out_dir, "abot_" + axis_name + suffix + "_summary.csv");
    summary << "axis_value,mean_abot\n";
    long skipped = 0;
    for (std::size_t v = 0; v < curve.values.size(); ++v) {
      summary << mbsfn::format_double(curve.values[v]) << ','
              << mbsfn::format_double(curve.mean[v]) << "\n";
      skipped += curve.skipped[v];
    }
    if (skipped > 0) {
      std::cerr << "abot-sweep: skipped " << skipped
                << " infeasible realizations in series '" << axis_name << suffix << "'\n";
    }
    std::cout << "abot-sweep: series=" << axis_name << suffix << " values=" << curve.values.size()
              << " upsilon=" << sweep_cfg.upsilon << " skipped=" << skipped
              << " mc_fallbacks=" << curve.mc_fallback_points << "\n";
  }
  return 0;
}

std::string problem_definition(const mbsfn::OutageProblem& p) {
  std::string def;
  for (std::size_t i = 0; i < p.combining.size(); ++i) {
    if (i > 0) def += ';';
    def += std::to_string(p.combining[i].nakagami_m) + ":" +
           mbsfn::format_double(p.combining[i].power);
  }
  def += '|';
  for (std::size_t i = 0; i < p.interfering.size(); ++i) {
    if (i > 0) def += ';';
    def += std::to_string(p.interfering[i].nakagami_m) + ":" +
           mbsfn::format_double(p.interfering[i].power);
  }
  return def;
}

int cmd_mc_validate(const CommonArgs& args, int only_instance) {
  const mbsfn::RunConfig cfg = load_config(args);
  auto rows = mbsfn::run_kernel_validation(cfg.seed, cfg.mc_instances, cfg.mc_trials);
  if (only_instance >= 0) {
    if (only_instance >= static_cast<int>(rows.size())) {
      throw mbsfn::ConfigError("--instance is out of range");
    }
    rows = {rows[static_cast<std::size_t>(only_instance)]};
  }

  auto out = open_output(args.out_dir, "mc_validation.csv");
  out << "instance,n_combining,n_interfering,beta,gamma,definition,closed_form,mc_estimate,"
         "std_error,tolerance,pass\n";
  int failures = 0;
  for (const auto& row : rows) {
    out << row.index << ',' << row.problem.combining.size() << ','
        << row.problem.interfering.size() << ',' << mbsfn::format_double(row.problem.sinr_threshold)
        << ',' << mbsfn::format_double(row.problem.snr) << ',' << problem_definition(row.problem)
        << ',' << mbsfn::format_double(row.closed_form) << ','
        << mbsfn::format_double(row.mc_estimate) << ',' << mbsfn::format_double(row.std_error)
        << ',' << mbsfn::format_double(row.tolerance) << ',' << (row.pass ? 1 : 0) << "\n";
    if (!row.pass) {
      ++failures;
      std::cerr << "mc-validate: instance " << row.index << " FAILED: closed_form="
                << mbsfn::format_double(row.closed_form)
                << " mc=" << mbsfn::format_double(row.mc_estimate)
                << " tol=" << mbsfn::format_double(row.tolerance)
                << " beta=" << mbsfn::format_double(row.problem.sinr_threshold)
                << " gamma=" << mbsfn::format_double(row.problem.snr)
                << " definition=" << problem_definition(row.problem)
                << " seed=" << cfg.seed << "\n";
    }
  }
  std::cout << "mc-validate: instances=" << rows.size() << " trials=" << cfg.mc_trials
            << " failures=" << failures << "\n";
  return failures == 0 ? 0 : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MBSFN broadcast coverage simulator"};
  app.require_subcommand(1);

  CommonArgs gen_args, map_args, sweep_args, mc_args;
  std::string topology_path, shadowing_dump;
  int only_instance = -1;

  auto* gen = app.add_subcommand("generate-topology", "place stations and write a topology file");
  add_common(gen, gen_args);
  auto* map = app.add_subcommand("outage-map", "write the per-location outage probability CSV");
  add_common(map, map_args);
  map->add_option("--topology", topology_path, "load a saved topology instead of generating one");
  map->add_option("--dump-shadowing", shadowing_dump, "also write the shadowing field CSV");
  auto* sweep = app.add_subcommand("abot-sweep", "run the configured ABOT parameter sweep");
  add_common(sweep, sweep_args);
  auto* mc = app.add_subcommand("mc-validate", "closed form vs Monte Carlo validation suite");
  add_common(mc, mc_args);
  mc->add_option("--instance", only_instance, "run a single instance by index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (gen->parsed()) return cmd_generate_topology(gen_args);
    if (map->parsed()) return cmd_outage_map(map_args, topology_path, shadowing_dump);
    if (sweep->parsed()) return cmd_abot_sweep(sweep_args);
    if (mc->parsed()) return cmd_mc_validate(mc_args, only_instance);
  } catch (const mbsfn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const mbsfn::PackingInfeasible& e) {
    std::cerr << "error: infeasible placement: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
