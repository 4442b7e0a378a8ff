#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbsfn/channel.hpp"
#include "mbsfn/outage.hpp"
#include "mbsfn/topology.hpp"

namespace mbsfn {

/// Conditional outage probabilities over one grid for one realization.
struct OutageMap {
  std::vector<double> epsilon;
  std::vector<int> serving;          // serving area per point
  std::vector<int> combining_count;  // N per point (0 = guaranteed outage)
  double beta = 1.0;
  double snr = 1.0;  // configured unit-distance SNR, linear
  OutageDiagnostics diagnostics;
  long empty_combining_points = 0;
  long mc_fallback_points = 0;
};

struct OutageMapOptions {
  int threads = 1;
  long mc_fallback_trials = 30000;  // stderr <= 2.9e-3, well under map tolerances
  std::uint64_t mc_fallback_seed = 0x6d6273666e6d6370ULL;
};

/// Evaluates the closed-form conditional outage at every grid point.
/// Locations without an admissible combining station get epsilon = 1; points
/// where even the extended-precision expansion is unstable fall back to a
/// deterministic seeded Monte Carlo estimate and are counted in the map
/// diagnostics.
///
/// The configured SNR refers to a unit-distance unshadowed link while profile
/// powers are normalized to 1 at the reference distance d0, so the kernel
/// threshold carries the d0^alpha conversion internally.
OutageMap outage_map(const ChannelProfile& profile, const EvaluationGrid& grid, double beta,
                     double gamma_lin, const OutageMapOptions& options = {});

/// Fraction of evaluation-window points with epsilon strictly below eps_hat.
double abot(const OutageMap& map, const EvaluationGrid& grid, double eps_hat);

/// Arithmetic mean over per-realization ABOT values.
double mean_abot(std::span<const double> values);

/// Shannon rate map inverse: beta = 2^rate - 1.
double rate_to_threshold(double rate_bpcu);

enum class SweepAxis { Rate, EpsilonHat, ExclusionRadius, SfnSpacing, Density };

const char* sweep_axis_name(SweepAxis axis);

struct ExperimentParams {
  int n_stations = 400;
  double density = 0.0;  // stations per unit area; M = round(density * d_net^2)
  bool use_density = false;
  double d_net = 20.0;
  double r_bs = 0.5;
  double d_sfn = 6.0;
  double d_max = 5.0;
  ChannelParams channel;
  bool r_f_tracks_r_bs = false;  // line-of-sight radius follows the exclusion radius
  double sigma_db = 0.0;
  double d_corr = 0.02;
  double gamma_lin = 10.0;
  double beta_lin = 1.0;
  double eps_hat = 0.1;
  double spacing = 0.1;
  double eval_side = 10.0;
  int placement_attempts = 10000;

  int resolved_station_count() const;
};

struct SweepConfig {
  ExperimentParams base;
  SweepAxis axis = SweepAxis::Rate;
  std::vector<double> values;
  int upsilon = 50;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct AbotCurve {
  SweepAxis axis = SweepAxis::Rate;
  std::vector<double> values;
  std::vector<std::vector<double>> abot;  // [value][realization]; NaN = skipped
  std::vector<double> mean;               // over completed realizations
  std::vector<int> skipped;
  OutageDiagnostics diagnostics;
  long empty_combining_points = 0;
  long mc_fallback_points = 0;
};

/// Runs the realization loop: per realization, place stations, form areas,
/// draw shadowing, build the profile, evaluate the outage map, and aggregate
/// ABOT along the sweep axis. Realization sub-seeds are shared across axis
/// values (common random numbers), so the whole sweep is a pure function of
/// the master seed. Placement failures skip that (value, realization) cell.
AbotCurve sweep(const SweepConfig& config);

}  // namespace mbsfn
