#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbsfn/metrics.hpp"

namespace mbsfn {

/// Parsed run configuration: flat `section.key = value` text, one conversion
/// of dB quantities to linear at parse time (shadowing sigma stays in dB).
struct RunConfig {
  // network
  std::optional<std::uint64_t> n_stations;
  std::optional<double> density;
  double d_net = 20.0;
  double r_bs = 0.5;
  double d_sfn = 6.0;
  std::optional<double> d_max;  // defaults to 5 km converted via km_per_unit
  double km_per_unit = 1.0;

  // channel
  double alpha = 3.5;
  double d0 = 0.01;
  double r_f = 0.5;
  bool r_f_tracks_r_bs = false;  // channel.r_f = r_bs
  double sigma_s_db = 0.0;
  double d_corr = 0.02;

  // radio (linear after parse)
  double gamma_lin = 10.0;
  std::optional<double> beta_lin;
  std::optional<double> rate_bpcu;

  // grid
  double spacing = 0.1;
  double eval_side = 10.0;

  // experiment
  int upsilon = 50;
  std::uint64_t seed = 1;
  double eps_hat = 0.1;
  std::optional<SweepAxis> sweep_axis;
  std::vector<double> sweep_values;
  std::optional<std::string> series_key;  // lambda | d_sfn | r_bs | sigma_s_db
  std::vector<double> series_values;

  // monte carlo validation
  int mc_instances = 50;
  long mc_trials = 100000;

  // output
  std::string output_dir = ".";

  double resolved_d_max() const { return d_max ? *d_max : 5.0 / km_per_unit; }
  double resolved_beta() const;

  /// Base parameters for metrics, after all defaulting and unit handling.
  ExperimentParams experiment_params() const;
};

/// Parses and validates; unrecognized keys, malformed values, and violations
/// of the exactly-one rules (M vs lambda, beta vs rate) raise ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// Applies a series override (one of lambda, d_sfn, r_bs, sigma_s_db) to a
/// parsed config.
RunConfig with_series_value(const RunConfig& base, const std::string& key, double value);

}  // namespace mbsfn
