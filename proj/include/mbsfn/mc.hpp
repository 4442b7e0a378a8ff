#pragma once

#include <cstdint>
#include <span>

#include "mbsfn/outage.hpp"

namespace mbsfn {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // binomial standard error
  long trials = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo ground truth for the outage kernel: redraws unit-mean gamma
/// power gains per trial, forms the SINR, and counts threshold violations.
/// Trials are processed in fixed-size sub-seeded chunks, so the estimate is a
/// pure function of (seed, trials).
McEstimate mc_outage(const OutageProblem& problem, long trials, std::uint64_t seed);

/// Interference-free oracle: cdf of sum_k g_k * power_k / beta at z, computed
/// by trapezoidal convolution of the gamma densities with Richardson-refined
/// step halving to `tol` absolute accuracy. Throws GridResolutionFailure when
/// the refinement budget is exhausted before converging.
double convolution_cdf(std::span<const FadingLink> combining, double beta, double z,
                       double tol = 1e-7);

/// One row of the randomized closed-form-vs-Monte-Carlo validation suite.
struct ValidationRow {
  int index = 0;
  OutageProblem problem;
  double closed_form = 0.0;
  double mc_estimate = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;  // max(0.01, 3 * std_error)
  bool pass = false;
};

/// Deterministic randomized instance: up to 8 stations, 1-3 of them combining,
/// shapes in {1,2,3}, powers log-uniform across three decades, beta in
/// [0.1, 10], snr in [1, 100].
OutageProblem make_validation_instance(std::uint64_t seed, int index);

/// Runs `instances` cases at `trials` Monte Carlo trials each and checks
/// |closed form - estimate| <= max(0.01, 3 * stderr) per instance.
std::vector<ValidationRow> run_kernel_validation(std::uint64_t seed, int instances, long trials);

}  // namespace mbsfn
