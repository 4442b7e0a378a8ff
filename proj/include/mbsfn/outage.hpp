#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbsfn/errors.hpp"

namespace mbsfn {

/// One radio link: normalized received power and integer Nakagami shape of its
/// fading power gain (unit mean).
struct FadingLink {
  double power = 0.0;  // Omega, linear
  int nakagami_m = 1;
};

/// Inputs of the conditional outage probability at one location: the MRC
/// combining links, the interfering links, the SINR threshold, and the SNR a
/// unit-power link would have (all linear, conditioned on the realization).
struct OutageProblem {
  std::vector<FadingLink> combining;
  std::vector<FadingLink> interfering;
  double sinr_threshold = 1.0;  // beta
  double snr = 1.0;             // Gamma; the cdf is evaluated at 1/snr
};

/// Gamma mixture component of the combined signal: scale eta = power/(beta*m)
/// and integer shape.
struct GammaComponent {
  double scale = 0.0;
  int shape = 0;
};

/// Converts combining links to gamma components, merging entries whose scales
/// coincide or nearly coincide (gamma variables of equal scale add in shape;
/// a near-equal cluster collapses to its shape-weighted mean scale, which the
/// pole expansion handles far better than a near-degenerate difference).
/// Result is sorted by ascending scale.
std::vector<GammaComponent> merge_equal_scales(std::span<const FadingLink> combining,
                                               double beta);

/// Number of vectors of `parts` non-negative integers summing to `total`.
/// Saturates at 2^63-1.
std::uint64_t weak_composition_count(int total, int parts);

inline constexpr std::uint64_t kCompositionBudget = 10'000'000;

/// Enumerates every weak composition exactly once, in colex order. Throws
/// ComplexityGuard when the count exceeds kCompositionBudget.
template <typename Visitor>
void for_each_weak_composition(int total, int parts, Visitor&& visit) {
  if (total < 0 || parts < 0) throw std::invalid_argument("weak compositions: negative input");
  if (weak_composition_count(total, parts) > kCompositionBudget) {
    throw ComplexityGuard("weak composition enumeration exceeds budget");
  }
  if (parts == 0) {
    if (total == 0) visit(std::span<const int>{});
    return;
  }
  std::vector<int> comp(static_cast<std::size_t>(parts), 0);
  comp[0] = total;
  for (;;) {
    visit(std::span<const int>(comp.data(), comp.size()));
    int i = 0;
    while (i < parts && comp[static_cast<std::size_t>(i)] == 0) ++i;
    if (i >= parts - 1) break;  // everything sits in the last slot (or total==0)
    const int v = comp[static_cast<std::size_t>(i)];
    comp[static_cast<std::size_t>(i)] = 0;
    comp[0] = v - 1;
    ++comp[static_cast<std::size_t>(i) + 1];
  }
}

/// Partial-fraction coefficient of the combined-signal transform: with
/// components (shape r_q, scale eta_q),
///   prod_q (1 + eta_q s)^-r_q  =  sum_k sum_{n=1}^{r_k} Xi(k,n) (1 + eta_k s)^-n
/// and this returns Xi(pole, order). Scales must be pairwise distinct
/// (DegenerateScales otherwise); coefficients over any valid component set sum
/// to one.
double partial_fraction_coefficient(int pole, int order,
                                    std::span<const GammaComponent> components);

struct OutageDiagnostics {
  long extended_precision = 0;  // double pass left the admissible band
  long clamped = 0;             // result clamped from within the band
  long failures = 0;            // NumericalInstability thrown

  OutageDiagnostics& operator+=(const OutageDiagnostics& o) {
    extended_precision += o.extended_precision;
    clamped += o.clamped;
    failures += o.failures;
    return *this;
  }
};

/// Exact conditional outage probability: the cdf of the combining gamma sum
/// minus the interference sum, evaluated at 1/snr. Computed by the closed-form
/// pole expansion with compensated summation; retried in extended precision
/// when cancellation pushes the raw result outside [-1e-6, 1+1e-6], and
/// NumericalInstability is thrown if that fails too.
double conditional_outage(const OutageProblem& problem, OutageDiagnostics* diag = nullptr);

}  // namespace mbsfn
