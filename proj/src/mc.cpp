#include "mbsfn/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mbsfn/rng.hpp"

namespace mbsfn {

namespace {

constexpr long kChunkTrials = 1 << 16;

}  // namespace

McEstimate mc_outage(const OutageProblem& problem, long trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("mc_outage: trials must be >= 1");
  if (problem.combining.empty()) throw std::invalid_argument("mc_outage: combining set is empty");

  const double beta = problem.sinr_threshold;
  const double inv_snr = 1.0 / problem.snr;
  long outages = 0;
  long done = 0;
  for (std::uint64_t chunk = 0; done < trials; ++chunk) {
    const long batch = std::min<long>(kChunkTrials, trials - done);
    Rng rng(derive_seed(seed, chunk));
    for (long t = 0; t < batch; ++t) {
      double signal = 0.0;
      for (const FadingLink& link : problem.combining) {
        signal += rng.unit_mean_gamma(link.nakagami_m) * link.power;
      }
      double denom = inv_snr;
      for (const FadingLink& link : problem.interfering) {
        denom += rng.unit_mean_gamma(link.nakagami_m) * link.power;
      }
      if (signal <= beta * denom) ++outages;
    }
    done += batch;
  }

  McEstimate est;
  est.trials = trials;
  est.seed = seed;
  est.estimate = static_cast<double>(outages) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
  return est;
}

namespace {

// Gamma density with integer shape, safe at x = 0.
double gamma_pdf(double x, int shape, double scale) {
  if (x < 0.0) return 0.0;
  if (x == 0.0) return shape == 1 ? 1.0 / scale : 0.0;
  return std::exp((shape - 1) * std::log(x) - x / scale - std::lgamma(double(shape)) -
                  shape * std::log(scale));
}

// Single trapezoidal pass at n intervals over [0, z]. Positive summands mean
// the convolution only ever needs values on [0, z].
double convolution_pass(std::span<const FadingLink> combining, double beta, double z, int n) {
  const double h = z / n;
  std::vector<double> density(static_cast<std::size_t>(n) + 1);
  std::vector<double> next(density.size());
  std::vector<double> part(density.size());

  const double scale0 = combining[0].power / (beta * combining[0].nakagami_m);
  for (int i = 0; i <= n; ++i) density[static_cast<std::size_t>(i)] =
      gamma_pdf(i * h, combining[0].nakagami_m, scale0);

  for (std::size_t term = 1; term < combining.size(); ++term) {
    const double scale = combining[term].power / (beta * combining[term].nakagami_m);
    for (int i = 0; i <= n; ++i) part[static_cast<std::size_t>(i)] =
        gamma_pdf(i * h, combining[term].nakagami_m, scale);
    for (int i = 0; i <= n; ++i) {
      double acc = 0.5 * (density[0] * part[static_cast<std::size_t>(i)] +
                          density[static_cast<std::size_t>(i)] * part[0]);
      for (int u = 1; u < i; ++u) {
        acc += density[static_cast<std::size_t>(u)] * part[static_cast<std::size_t>(i - u)];
      }
      next[static_cast<std::size_t>(i)] = (i == 0) ? 0.0 : acc * h;
    }
    std::swap(density, next);
  }

  double cdf = 0.5 * (density[0] + density[static_cast<std::size_t>(n)]);
  for (int i = 1; i < n; ++i) cdf += density[static_cast<std::size_t>(i)];
  return cdf * h;
}

}  // namespace

double convolution_cdf(std::span<const FadingLink> combining, double beta, double z,
                       double tol) {
  if (combining.empty()) throw std::invalid_argument("convolution_cdf: combining set is empty");
  if (!(beta > 0.0)) throw std::invalid_argument("convolution_cdf: beta must be > 0");
  if (z <= 0.0) return 0.0;

  double prev = convolution_pass(combining, beta, z, 512);
  double prev_extrap = 0.0;
  bool have_extrap = false;
  for (int n = 1024; n <= 32768; n *= 2) {
    const double cur = convolution_pass(combining, beta, z, n);
    const double extrap = (4.0 * cur - prev) / 3.0;  // trapezoid error is O(h^2)
    if (have_extrap && std::abs(extrap - prev_extrap) <= tol / 4.0 &&
        std::abs(cur - prev) <= 64.0 * tol) {
      return extrap;
    }
    prev = cur;
    prev_extrap = extrap;
    have_extrap = true;
  }
  throw GridResolutionFailure("convolution_cdf: refinement budget exhausted before reaching tol");
}

OutageProblem make_validation_instance(std::uint64_t seed, int index) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index), 1000));
  OutageProblem problem;
  const int n_combining = 1 + static_cast<int>(rng.uniform() * 3.0);
  const int n_total = n_combining + static_cast<int>(rng.uniform() * (9.0 - n_combining));
  const auto draw_link = [&rng] {
    FadingLink link;
    link.nakagami_m = 1 + static_cast<int>(rng.uniform() * 3.0);
    link.power = std::pow(10.0, rng.uniform() * 3.0 - 1.5);
    return link;
  };
  for (int i = 0; i < n_combining; ++i) problem.combining.push_back(draw_link());
  for (int i = n_combining; i < n_total; ++i) problem.interfering.push_back(draw_link());
  problem.sinr_threshold = std::pow(10.0, rng.uniform() * 2.0 - 1.0);
  problem.snr = std::pow(10.0, rng.uniform() * 2.0);
  return problem;
}

std::vector<ValidationRow> run_kernel_validation(std::uint64_t seed, int instances, long trials) {
  if (instances < 1) throw std::invalid_argument("run_kernel_validation: instances must be >= 1");
  std::vector<ValidationRow> rows;
  rows.reserve(static_cast<std::size_t>(instances));
  for (int i = 0; i < instances; ++i) {
    ValidationRow row;
    row.index = i;
    row.problem = make_validation_instance(seed, i);
    row.closed_form = conditional_outage(row.problem);
    const McEstimate mc =
        mc_outage(row.problem, trials, derive_seed(seed, static_cast<std::uint64_t>(i), 2000));
    row.mc_estimate = mc.estimate;
    row.std_error = mc.std_error;
    row.tolerance = std::max(0.01, 3.0 * mc.std_error);
    row.pass = std::abs(row.closed_form - row.mc_estimate) <= row.tolerance;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mbsfn
