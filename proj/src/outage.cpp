#include "mbsfn/outage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mbsfn/kahan.hpp"

namespace mbsfn {

namespace {

// Scales closer than this (relative) are merged rather than expanded. The
// pole expansion needs the differences 1 - eta_q/eta_k, which carry an
// absolute rounding error near 1e-16; below ~1e-6 separation that error,
// amplified by the 1/gap^k coefficient growth, exceeds the O(gap) error of
// merging the components outright.
constexpr double kMergeRelTol = 1e-6;
constexpr double kAdmissibleBand = 1e-6;

template <typename Real>
Real pow_int(Real x, int p) {
  Real r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// In-place truncated polynomial product; series[0..deg] multiplies poly[0..deg].
template <typename Real>
void trunc_multiply(std::vector<Real>& poly, const Real* series, int deg) {
  for (int d = deg; d >= 0; --d) {
    Real acc = 0;
    for (int j = 0; j <= d; ++j) acc += poly[static_cast<std::size_t>(d - j)] * series[j];
    poly[static_cast<std::size_t>(d)] = acc;
  }
}

// Running product with binary-exponent tracking; stands in for log-space
// accumulation without a log() per factor.
template <typename Real>
struct ScaledProduct {
  Real mantissa = 1;
  long exponent = 0;

  void multiply(Real f) {
    mantissa *= f;
    if (mantissa > Real(0x1p+900) || mantissa < Real(0x1p-900)) {
      int e = 0;
      mantissa = std::frexp(mantissa, &e);
      exponent += e;
    }
  }

  // value / product
  Real divide_into(Real value) const {
    return std::ldexp(value / mantissa, static_cast<int>(-std::min<long>(
                                             std::max<long>(exponent, -60000), 60000)));
  }
};

// Expansion data for one pole k of prod_q (1 + eta_q s)^-r_q:
//   Xi(k, n) = sign * poly[r_k - n] / magnitude.
// The magnitude is prod_{q!=k} |1 - eta_q/eta_k|^r_q, kept in scaled-product
// form since clustered scales inflate it far beyond the final coefficient.
// poly collects the cross-derivative weights of the remaining factors as a
// truncated series.
template <typename Real>
struct PoleExpansion {
  ScaledProduct<Real> magnitude;
  int sign = 1;
  std::vector<Real> poly;

  Real coefficient(int degree) const {
    return magnitude.divide_into(Real(sign) * poly[static_cast<std::size_t>(degree)]);
  }
};

template <typename Real>
PoleExpansion<Real> expand_pole(int pole, int max_degree,
                                std::span<const GammaComponent> comps) {
  PoleExpansion<Real> out;
  out.poly.assign(static_cast<std::size_t>(max_degree) + 1, Real(0));
  out.poly[0] = 1;
  const Real inv_eta_k = Real(1) / static_cast<Real>(comps[static_cast<std::size_t>(pole)].scale);
  std::vector<Real> series(static_cast<std::size_t>(max_degree) + 1);
  for (int q = 0; q < static_cast<int>(comps.size()); ++q) {
    if (q == pole) continue;
    const Real ratio = static_cast<Real>(comps[static_cast<std::size_t>(q)].scale) * inv_eta_k;
    const Real w = Real(1) - ratio;
    if (w == Real(0)) throw DegenerateScales("coinciding scale parameters in pole expansion");
    const int r_q = comps[static_cast<std::size_t>(q)].shape;
    const Real aw = w < 0 ? -w : w;
    if (r_q <= 16) {
      Real f = aw;
      for (int j = 1; j < r_q; ++j) f *= aw;
      out.magnitude.multiply(f);
    } else {
      for (int j = 0; j < r_q; ++j) out.magnitude.multiply(aw);
    }
    if (w < 0 && (r_q & 1)) out.sign = -out.sign;
    if (max_degree > 0) {
      const Real sigma = ratio / w;
      series[0] = 1;
      for (int j = 1; j <= max_degree; ++j) {
        series[static_cast<std::size_t>(j)] =
            -series[static_cast<std::size_t>(j - 1)] * sigma * Real(r_q + j - 1) / Real(j);
      }
      trunc_multiply(out.poly, series.data(), max_degree);
    }
  }
  return out;
}

template <typename Real>
Real factorial_of(int n) {
  static const Real kTable[] = {Real(1),     Real(1),      Real(2),       Real(6),
                                Real(24),    Real(120),    Real(720),     Real(5040),
                                Real(40320), Real(362880), Real(3628800), Real(39916800)};
  if (n < 12) return kTable[n];
  Real f = kTable[11];
  for (int i = 12; i <= n; ++i) f *= Real(i);
  return f;
}

// Closed-form cdf of (combining gamma sum - interference sum) at z >= 0.
//
// For each pole the interference enters through the coefficients of
//   prod_i sum_l C(m_i+l-1, l) (theta_i/(eta_k+theta_i))^l x^l * (1+theta_i/eta_k)^-m_i
// truncated at degree r_k-1; the l-th coefficient is the scaled l-th
// cross-moment of the interference sum under the pole's exponential tilt. The
// per-interferer base factors fold into the pole's exponential through a
// scaled product, so the hot loop is a handful of multiplies per interferer
// and the series division is only paid for poles of shape >= 2.
template <typename Real>
Real evaluate_cdf(std::span<const GammaComponent> comps, std::span<const FadingLink> interfering,
                  Real z) {
  static constexpr Real kInvShape[] = {Real(0),         Real(1),         Real(1) / Real(2),
                                       Real(1) / Real(3), Real(1) / Real(4), Real(1) / Real(5),
                                       Real(1) / Real(6), Real(1) / Real(7), Real(1) / Real(8)};
  CompensatedSum<Real> total;
  std::vector<Real> chat, series, s_mu;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const Real inv_eta_k = Real(1) / static_cast<Real>(comps[k].scale);
    const int r_k = comps[k].shape;
    const int deg = r_k - 1;
    const Real x = z * inv_eta_k;

    chat.assign(static_cast<std::size_t>(deg) + 1, Real(0));
    chat[0] = 1;
    series.resize(static_cast<std::size_t>(deg) + 1);
    ScaledProduct<Real> base;
    for (const FadingLink& link : interfering) {
      const int m = link.nakagami_m;
      const Real theta = static_cast<Real>(link.power) *
                         (m <= 8 ? kInvShape[m] : Real(1) / Real(m));
      const Real rho = theta * inv_eta_k;
      const Real t1 = Real(1) + rho;
      if (m <= 16) {
        Real f = t1;
        for (int j = 1; j < m; ++j) f *= t1;
        base.multiply(f);
      } else {
        for (int j = 0; j < m; ++j) base.multiply(t1);
      }
      if (deg >= 1) {
        const Real g = rho / t1;
        series[0] = 1;
        for (int j = 1; j <= deg; ++j) {
          series[static_cast<std::size_t>(j)] =
              series[static_cast<std::size_t>(j - 1)] * g * Real(m + j - 1) / Real(j);
        }
        trunc_multiply(chat, series.data(), deg);
      }
    }

    const auto expansion = expand_pole<Real>(static_cast<int>(k), deg, comps);
    const Real tilt = base.divide_into(std::exp(-x));

    s_mu.resize(static_cast<std::size_t>(r_k));
    for (int mu = 0; mu <= deg; ++mu) {
      Real acc = 0;
      for (int t = 0; t <= mu; ++t) {
        acc += pow_int(x, mu - t) / factorial_of<Real>(mu - t) * chat[static_cast<std::size_t>(t)];
      }
      s_mu[static_cast<std::size_t>(mu)] = acc;
    }

    Real prefix = 0;
    for (int n = 1; n <= r_k; ++n) {
      prefix += s_mu[static_cast<std::size_t>(n - 1)];
      total.add(expansion.coefficient(r_k - n) * (Real(1) - tilt * prefix));
    }
  }
  return total.value();
}

void validate_problem(const OutageProblem& p) {
  if (p.combining.empty()) throw std::invalid_argument("outage: combining set is empty");
  if (!(p.sinr_threshold > 0.0)) throw std::invalid_argument("outage: beta must be > 0");
  if (!(p.snr > 0.0)) throw std::invalid_argument("outage: snr must be > 0");
  for (const FadingLink& l : p.combining) {
    if (!(l.power > 0.0) || l.nakagami_m < 1) {
      throw std::invalid_argument("outage: combining links need power > 0 and m >= 1");
    }
  }
  for (const FadingLink& l : p.interfering) {
    if (!(l.power > 0.0) || l.nakagami_m < 1) {
      throw std::invalid_argument("outage: interfering links need power > 0 and m >= 1");
    }
  }
}

}  // namespace

std::vector<GammaComponent> merge_equal_scales(std::span<const FadingLink> combining,
                                               double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("merge_equal_scales: beta must be > 0");
  std::vector<GammaComponent> comps;
  comps.reserve(combining.size());
  for (const FadingLink& link : combining) {
    comps.push_back({link.power / (beta * link.nakagami_m), link.nakagami_m});
  }
  std::sort(comps.begin(), comps.end(),
            [](const GammaComponent& a, const GammaComponent& b) { return a.scale < b.scale; });

  // Clusters of near-equal scales collapse to one component whose scale is the
  // shape-weighted mean, preserving the mean of the summed variable exactly.
  std::vector<GammaComponent> merged;
  double cluster_weight = 0.0;
  double cluster_ref = -1.0;
  for (const GammaComponent& c : comps) {
    if (!merged.empty() && c.scale <= cluster_ref * (1.0 + kMergeRelTol)) {
      cluster_weight += c.scale * c.shape;
      merged.back().shape += c.shape;
      merged.back().scale = cluster_weight / merged.back().shape;
    } else {
      merged.push_back(c);
      cluster_weight = c.scale * c.shape;
    }
    cluster_ref = c.scale;
  }
  return merged;
}

std::uint64_t weak_composition_count(int total, int parts) {
  if (total < 0 || parts < 0) throw std::invalid_argument("weak_composition_count: negative input");
  if (parts == 0) return total == 0 ? 1 : 0;
  if (total == 0) return 1;
  // C(total + parts - 1, total), saturating
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max() / 2;
  std::uint64_t c = 1;
  for (int i = 1; i <= total; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(parts - 1 + i);
    if (c > cap / num) return std::numeric_limits<std::uint64_t>::max();
    c = c * num / static_cast<std::uint64_t>(i);  // exact: prefix binomials are integers
  }
  return c;
}

double partial_fraction_coefficient(int pole, int order,
                                    std::span<const GammaComponent> components) {
  const int count = static_cast<int>(components.size());
  if (pole < 0 || pole >= count) {
    throw std::invalid_argument("partial_fraction_coefficient: pole index out of range");
  }
  for (const GammaComponent& c : components) {
    if (!(c.scale > 0.0) || c.shape < 1) {
      throw std::invalid_argument(
          "partial_fraction_coefficient: scales must be > 0 and shapes >= 1");
    }
  }
  const int r_k = components[static_cast<std::size_t>(pole)].shape;
  if (order < 1 || order > r_k) {
    throw std::invalid_argument("partial_fraction_coefficient: order out of range");
  }
  for (int a = 0; a < count; ++a) {
    for (int b = a + 1; b < count; ++b) {
      if (components[static_cast<std::size_t>(a)].scale ==
          components[static_cast<std::size_t>(b)].scale) {
        throw DegenerateScales("partial_fraction_coefficient: scales must be pairwise distinct");
      }
    }
  }
  const int deg = r_k - order;
  const auto expansion = expand_pole<long double>(pole, deg, components);
  return static_cast<double>(expansion.coefficient(deg));
}

double conditional_outage(const OutageProblem& problem, OutageDiagnostics* diag) {
  validate_problem(problem);
  const auto comps = merge_equal_scales(problem.combining, problem.sinr_threshold);
  const double z = 1.0 / problem.snr;

  double value = evaluate_cdf<double>(comps, problem.interfering, z);
  if (!(value >= -kAdmissibleBand && value <= 1.0 + kAdmissibleBand)) {
    if (diag != nullptr) ++diag->extended_precision;
    const long double wide =
        evaluate_cdf<long double>(comps, problem.interfering, static_cast<long double>(z));
    if (!(wide >= -static_cast<long double>(kAdmissibleBand) &&
          wide <= 1.0L + static_cast<long double>(kAdmissibleBand))) {
      if (diag != nullptr) ++diag->failures;
      std::ostringstream msg;
      msg << "conditional outage evaluated to " << static_cast<double>(wide)
          << " outside the admissible band";
      throw NumericalInstability(msg.str(), static_cast<double>(wide));
    }
    value = static_cast<double>(wide);
  }
  if (value < 0.0 || value > 1.0) {
    if (diag != nullptr) ++diag->clamped;
    value = std::clamp(value, 0.0, 1.0);
  }
  return value;
}

}  // namespace mbsfn
