#include "mbsfn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "mbsfn/mc.hpp"
#include "mbsfn/parallel.hpp"
#include "mbsfn/rng.hpp"

namespace mbsfn {

OutageMap outage_map(const ChannelProfile& profile, const EvaluationGrid& grid, double beta,
                     double gamma_lin, const OutageMapOptions& options) {
  if (!(beta > 0.0)) throw std::invalid_argument("outage_map: beta must be > 0");
  if (!(gamma_lin > 0.0)) throw std::invalid_argument("outage_map: gamma must be > 0");
  if (profile.n_points != static_cast<int>(grid.points.size())) {
    throw std::invalid_argument("outage_map: profile and grid disagree on point count");
  }

  OutageMap map;
  map.beta = beta;
  map.snr = gamma_lin;
  const std::size_t n = grid.points.size();
  map.epsilon.assign(n, 1.0);
  map.serving = profile.serving;
  map.combining_count.assign(n, 0);

  // Profile powers are path-loss-normalized at d0; the configured SNR is
  // referenced to unit distance, hence the d0^alpha conversion.
  const double snr_eff = gamma_lin / std::pow(profile.params.d0, profile.params.alpha);

  const int threads = resolve_thread_count(options.threads);
  std::vector<OutageDiagnostics> diag(static_cast<std::size_t>(threads));
  std::vector<long> empty_counts(static_cast<std::size_t>(threads), 0);
  std::vector<long> mc_counts(static_cast<std::size_t>(threads), 0);

  const std::size_t chunk = (n + static_cast<std::size_t>(threads) - 1) / threads;
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    const std::size_t worker = std::min<std::size_t>(begin / std::max<std::size_t>(chunk, 1),
                                                     static_cast<std::size_t>(threads) - 1);
    OutageProblem problem;
    problem.sinr_threshold = beta;
    problem.snr = snr_eff;
    for (std::size_t j = begin; j < end; ++j) {
      const auto& members = profile.combining[j];
      map.combining_count[j] = static_cast<int>(members.size());
      if (members.empty()) {
        ++empty_counts[worker];
        map.epsilon[j] = 1.0;
        continue;
      }
      const double* omega_row = profile.omega.data() + j * profile.n_stations;
      const std::uint8_t* shape_row = profile.shape.data() + j * profile.n_stations;
      problem.combining.clear();
      problem.interfering.clear();
      std::size_t next_member = 0;
      for (int i = 0; i < profile.n_stations; ++i) {
        if (next_member < members.size() && members[next_member] == i) {
          problem.combining.push_back({omega_row[i], shape_row[i]});
          ++next_member;
        } else {
          problem.interfering.push_back({omega_row[i], shape_row[i]});
        }
      }
      try {
        map.epsilon[j] = conditional_outage(problem, &diag[worker]);
      } catch (const NumericalInstability&) {
        const auto mc = mc_outage(problem, options.mc_fallback_trials,
                                  derive_seed(options.mc_fallback_seed, j));
        map.epsilon[j] = mc.estimate;
        ++mc_counts[worker];
      }
    }
  });
  for (int w = 0; w < threads; ++w) {
    map.diagnostics += diag[static_cast<std::size_t>(w)];
    map.empty_combining_points += empty_counts[static_cast<std::size_t>(w)];
    map.mc_fallback_points += mc_counts[static_cast<std::size_t>(w)];
  }
  return map;
}

double abot(const OutageMap& map, const EvaluationGrid& grid, double eps_hat) {
  if (!(eps_hat > 0.0 && eps_hat < 1.0)) {
    throw std::invalid_argument("abot: eps_hat must lie in (0, 1)");
  }
  if (map.epsilon.size() != grid.points.size()) {
    throw std::invalid_argument("abot: map and grid disagree on point count");
  }
  if (grid.eval_indices.empty()) throw std::invalid_argument("abot: empty evaluation window");
  long covered = 0;
  for (std::uint32_t idx : grid.eval_indices) {
    if (map.epsilon[idx] < eps_hat) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(grid.eval_indices.size());
}

double mean_abot(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_abot: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double rate_to_threshold(double rate_bpcu) {
  if (!(rate_bpcu > 0.0)) throw std::invalid_argument("rate_to_threshold: rate must be > 0");
  return std::exp2(rate_bpcu) - 1.0;
}

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Rate: return "R";
    case SweepAxis::EpsilonHat: return "epsilon_hat";
    case SweepAxis::ExclusionRadius: return "r_bs";
    case SweepAxis::SfnSpacing: return "d_sfn";
    case SweepAxis::Density: return "lambda";
  }
  return "?";
}

int ExperimentParams::resolved_station_count() const {
  if (!use_density) return n_stations;
  const double m = std::round(density * d_net * d_net);
  if (m < 1.0) throw std::invalid_argument("density yields fewer than one station");
  return static_cast<int>(m);
}

namespace {

struct Realization {
  NetworkTopology topology;
  MbsfnPartition partition;
  ChannelProfile profile;
};

std::optional<Realization> build_realization(const ExperimentParams& p, int n_stations,
                                             const EvaluationGrid& grid,
                                             const ShadowingField* field, std::uint64_t topo_seed,
                                             int threads) {
  Realization real;
  try {
    real.topology =
        place_base_stations(n_stations, p.d_net, p.r_bs, topo_seed, p.placement_attempts);
  } catch (const PackingInfeasible&) {
    return std::nullopt;
  }
  real.partition =
      assign_mbsfn_areas(real.topology, hex_grid_centers(p.d_net, p.d_sfn), p.d_sfn, p.d_max);
  ChannelParams ch = p.channel;
  if (p.r_f_tracks_r_bs) ch.r_f = p.r_bs;
  real.profile = build_profile(real.topology, real.partition, grid, field, ch, threads);
  return real;
}

ExperimentParams apply_axis(const ExperimentParams& base, SweepAxis axis, double value) {
  ExperimentParams p = base;
  switch (axis) {
    case SweepAxis::Rate:
      p.beta_lin = rate_to_threshold(value);
      break;
    case SweepAxis::EpsilonHat:
      p.eps_hat = value;
      break;
    case SweepAxis::ExclusionRadius:
      p.r_bs = value;
      break;
    case SweepAxis::SfnSpacing:
      p.d_sfn = value;
      break;
    case SweepAxis::Density:
      p.density = value;
      p.use_density = true;
      break;
  }
  return p;
}

}  // namespace

AbotCurve sweep(const SweepConfig& config) {
  if (config.values.empty()) throw std::invalid_argument("sweep: no axis values");
  if (config.upsilon < 1) throw std::invalid_argument("sweep: upsilon must be >= 1");

  AbotCurve curve;
  curve.axis = config.axis;
  curve.values = config.values;
  curve.abot.assign(config.values.size(),
                    std::vector<double>(static_cast<std::size_t>(config.upsilon),
                                        std::numeric_limits<double>::quiet_NaN()));
  curve.skipped.assign(config.values.size(), 0);

  const EvaluationGrid grid =
      evaluation_grid(config.base.d_net, config.base.spacing, config.base.eval_side)
          .eval_window();

  // Station count per axis value (constant except along the density axis).
  std::vector<int> stations_for_value(config.values.size());
  int max_stations = 0;
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    stations_for_value[v] =
        apply_axis(config.base, config.axis, config.values[v]).resolved_station_count();
    max_stations = std::max(max_stations, stations_for_value[v]);
  }

  std::optional<ShadowingModel> shadow_model;
  if (config.base.sigma_db > 0.0) shadow_model.emplace(grid, config.base.d_corr);

  OutageMapOptions map_options;
  map_options.threads = config.threads;

  const bool rebuild_per_value =
      config.axis == SweepAxis::ExclusionRadius || config.axis == SweepAxis::SfnSpacing ||
      config.axis == SweepAxis::Density;

  for (int t = 0; t < config.upsilon; ++t) {
    const std::uint64_t topo_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t), 1);
    const std::uint64_t shad_seed = derive_seed(config.seed, static_cast<std::uint64_t>(t), 2);

    ShadowingField field;
    const ShadowingField* field_ptr = nullptr;
    if (shadow_model) {
      field = shadow_model->generate(max_stations, config.base.sigma_db, shad_seed,
                                     config.threads);
      field_ptr = &field;
    }

    if (!rebuild_per_value) {
      const auto real = build_realization(config.base, stations_for_value[0], grid, field_ptr,
                                          topo_seed, config.threads);
      if (!real) {
        for (std::size_t v = 0; v < config.values.size(); ++v) ++curve.skipped[v];
        continue;
      }
      if (config.axis == SweepAxis::Rate) {
        for (std::size_t v = 0; v < config.values.size(); ++v) {
          const double beta = rate_to_threshold(config.values[v]);
          const OutageMap map =
              outage_map(real->profile, grid, beta, config.base.gamma_lin, map_options);
          curve.abot[v][static_cast<std::size_t>(t)] = abot(map, grid, config.base.eps_hat);
          curve.diagnostics += map.diagnostics;
          curve.empty_combining_points += map.empty_combining_points;
          curve.mc_fallback_points += map.mc_fallback_points;
        }
      } else {  // EpsilonHat: one map, many thresholds
        const OutageMap map = outage_map(real->profile, grid, config.base.beta_lin,
                                         config.base.gamma_lin, map_options);
        for (std::size_t v = 0; v < config.values.size(); ++v) {
          curve.abot[v][static_cast<std::size_t>(t)] = abot(map, grid, config.values[v]);
        }
        curve.diagnostics += map.diagnostics;
        curve.empty_combining_points += map.empty_combining_points;
        curve.mc_fallback_points += map.mc_fallback_points;
      }
      continue;
    }

    for (std::size_t v = 0; v < config.values.size(); ++v) {
      const ExperimentParams params = apply_axis(config.base, config.axis, config.values[v]);
      const auto real = build_realization(params, stations_for_value[v], grid, field_ptr,
                                          topo_seed, config.threads);
      if (!real) {
        ++curve.skipped[v];
        continue;
      }
      const OutageMap map =
          outage_map(real->profile, grid, params.beta_lin, params.gamma_lin, map_options);
      curve.abot[v][static_cast<std::size_t>(t)] = abot(map, grid, params.eps_hat);
      curve.diagnostics += map.diagnostics;
      curve.empty_combining_points += map.empty_combining_points;
      curve.mc_fallback_points += map.mc_fallback_points;
    }
  }

  curve.mean.resize(config.values.size());
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    double sum = 0.0;
    int done = 0;
    for (double a : curve.abot[v]) {
      if (!std::isnan(a)) {
        sum += a;
        ++done;
      }
    }
    curve.mean[v] = done > 0 ? sum / done : std::numeric_limits<double>::quiet_NaN();
  }
  return curve;
}

}  // namespace mbsfn
