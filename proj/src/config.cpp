#include "mbsfn/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "mbsfn/errors.hpp"
#include "mbsfn/format.hpp"

namespace mbsfn {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  if (!parse_double(value, out)) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  if (!parse_u64(value, out)) {
    throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" + value +
                      "'");
  }
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(key, item));
  }
  return out;
}

SweepAxis to_axis(const std::string& value) {
  if (value == "R") return SweepAxis::Rate;
  if (value == "epsilon_hat") return SweepAxis::EpsilonHat;
  if (value == "r_bs") return SweepAxis::ExclusionRadius;
  if (value == "d_sfn") return SweepAxis::SfnSpacing;
  if (value == "lambda") return SweepAxis::Density;
  throw ConfigError("config: unknown sweep axis '" + value +
                    "' (expected R, epsilon_hat, r_bs, d_sfn or lambda)");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void require(bool cond, const std::string& message) {
  if (!cond) throw ConfigError("config: " + message);
}

}  // namespace

double RunConfig::resolved_beta() const {
  if (beta_lin) return *beta_lin;
  return std::exp2(*rate_bpcu) - 1.0;
}

ExperimentParams RunConfig::experiment_params() const {
  ExperimentParams p;
  if (density) {
    p.use_density = true;
    p.density = *density;
  } else {
    p.use_density = false;
    p.n_stations = static_cast<int>(*n_stations);
  }
  p.d_net = d_net;
  p.r_bs = r_bs;
  p.d_sfn = d_sfn;
  p.d_max = resolved_d_max();
  p.channel.alpha = alpha;
  p.channel.d0 = d0;
  p.channel.r_f = r_f;
  p.r_f_tracks_r_bs = r_f_tracks_r_bs;
  p.sigma_db = sigma_s_db;
  p.d_corr = d_corr;
  p.gamma_lin = gamma_lin;
  p.beta_lin = resolved_beta();
  p.eps_hat = eps_hat;
  p.spacing = spacing;
  p.eval_side = eval_side;
  return p;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  bool have_beta = false, have_rate = false, have_m = false, have_lambda = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (value.empty()) throw ConfigError("config: key '" + key + "' has no value");

    if (key == "network.M") {
      cfg.n_stations = to_u64(key, value);
      have_m = true;
    } else if (key == "network.lambda") {
      cfg.density = to_double(key, value);
      have_lambda = true;
    } else if (key == "network.d_net") {
      cfg.d_net = to_double(key, value);
    } else if (key == "network.r_bs") {
      cfg.r_bs = to_double(key, value);
    } else if (key == "network.d_sfn") {
      cfg.d_sfn = to_double(key, value);
    } else if (key == "network.d_max") {
      cfg.d_max = to_double(key, value);
    } else if (key == "network.km_per_unit") {
      cfg.km_per_unit = to_double(key, value);
    } else if (key == "channel.alpha") {
      cfg.alpha = to_double(key, value);
    } else if (key == "channel.d0") {
      cfg.d0 = to_double(key, value);
    } else if (key == "channel.r_f") {
      if (value == "r_bs") {
        cfg.r_f_tracks_r_bs = true;
      } else {
        cfg.r_f = to_double(key, value);
      }
    } else if (key == "channel.sigma_s_db") {
      cfg.sigma_s_db = to_double(key, value);
    } else if (key == "channel.d_corr") {
      cfg.d_corr = to_double(key, value);
    } else if (key == "radio.gamma_db") {
      cfg.gamma_lin = db_to_linear(to_double(key, value));
    } else if (key == "radio.beta_db") {
      cfg.beta_lin = db_to_linear(to_double(key, value));
      have_beta = true;
    } else if (key == "radio.rate_bpcu") {
      cfg.rate_bpcu = to_double(key, value);
      have_rate = true;
    } else if (key == "grid.spacing") {
      cfg.spacing = to_double(key, value);
    } else if (key == "grid.eval_side") {
      cfg.eval_side = to_double(key, value);
    } else if (key == "experiment.upsilon") {
      cfg.upsilon = static_cast<int>(to_u64(key, value));
    } else if (key == "experiment.seed") {
      cfg.seed = to_u64(key, value);
    } else if (key == "experiment.epsilon_hat") {
      cfg.eps_hat = to_double(key, value);
    } else if (key == "experiment.sweep_axis") {
      cfg.sweep_axis = to_axis(value);
    } else if (key == "experiment.sweep_values") {
      cfg.sweep_values = to_list(key, value);
    } else if (key == "experiment.series_key") {
      cfg.series_key = value;
    } else if (key == "experiment.series_values") {
      cfg.series_values = to_list(key, value);
    } else if (key == "mc.instances") {
      cfg.mc_instances = static_cast<int>(to_u64(key, value));
    } else if (key == "mc.trials") {
      cfg.mc_trials = static_cast<long>(to_u64(key, value));
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  require(have_m != have_lambda, "exactly one of network.M and network.lambda must be given");
  require(have_beta != have_rate,
          "exactly one of radio.beta_db and radio.rate_bpcu must be given");
  require(cfg.d_net > 0.0, "network.d_net must be > 0");
  require(cfg.r_bs >= 0.0, "network.r_bs must be >= 0");
  require(cfg.d_sfn > 0.0, "network.d_sfn must be > 0");
  require(!cfg.d_max || *cfg.d_max > 0.0, "network.d_max must be > 0");
  require(cfg.km_per_unit > 0.0, "network.km_per_unit must be > 0");
  require(cfg.alpha >= 2.0, "channel.alpha must be >= 2");
  require(cfg.d0 > 0.0, "channel.d0 must be > 0");
  require(cfg.r_f >= 0.0, "channel.r_f must be >= 0");
  require(cfg.sigma_s_db >= 0.0, "channel.sigma_s_db must be >= 0");
  require(cfg.d_corr > 0.0, "channel.d_corr must be > 0");
  require(!cfg.beta_lin || *cfg.beta_lin > 0.0, "radio.beta_db must define a positive threshold");
  require(!cfg.rate_bpcu || *cfg.rate_bpcu > 0.0, "radio.rate_bpcu must be > 0");
  require(cfg.spacing > 0.0 && cfg.spacing <= cfg.d_net, "grid.spacing must be in (0, d_net]");
  require(cfg.eval_side > 0.0 && cfg.eval_side <= cfg.d_net,
          "grid.eval_side must be in (0, d_net]");
  require(cfg.upsilon >= 1, "experiment.upsilon must be >= 1");
  require(cfg.eps_hat > 0.0 && cfg.eps_hat < 1.0, "experiment.epsilon_hat must be in (0, 1)");
  require(!cfg.n_stations || *cfg.n_stations >= 1, "network.M must be >= 1");
  require(!cfg.density || *cfg.density > 0.0, "network.lambda must be > 0");
  require(cfg.mc_instances >= 1, "mc.instances must be >= 1");
  require(cfg.mc_trials >= 1, "mc.trials must be >= 1");
  if (cfg.series_key) {
    require(!cfg.series_values.empty(), "experiment.series_key given without series_values");
    const std::string& k = *cfg.series_key;
    require(k == "lambda" || k == "d_sfn" || k == "r_bs" || k == "sigma_s_db",
            "experiment.series_key must be one of lambda, d_sfn, r_bs, sigma_s_db");
    if (k == "lambda") {
      require(!have_m, "a lambda series cannot be combined with network.M");
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in);
}

RunConfig with_series_value(const RunConfig& base, const std::string& key, double value) {
  RunConfig cfg = base;
  if (key == "lambda") {
    cfg.density = value;
    cfg.n_stations.reset();
  } else if (key == "d_sfn") {
    cfg.d_sfn = value;
  } else if (key == "r_bs") {
    cfg.r_bs = value;
  } else if (key == "sigma_s_db") {
    cfg.sigma_s_db = value;
  } else {
    throw ConfigError("config: unknown series key '" + key + "'");
  }
  return cfg;
}

}  // namespace mbsfn
