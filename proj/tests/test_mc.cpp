#include <cmath>
#include <vector>

#include "doctest.h"
#include "mbsfn/mc.hpp"
#include "mbsfn/rng.hpp"

using namespace mbsfn;

TEST_CASE("monte carlo reproduces the Rayleigh single-source value") {
  OutageProblem p;
  p.combining = {{1.0, 1}};
  p.sinr_threshold = 1.0;
  p.snr = 10.0;
  const auto est = mc_outage(p, 200000, 11);
  const double analytic = 1.0 - std::exp(-0.1);
  CHECK(std::abs(est.estimate - analytic) <= 3.0 * est.std_error);
}

TEST_CASE("vanishing threshold drives the estimate to zero") {
  OutageProblem p;
  p.combining = {{1.0, 2}};
  p.sinr_threshold = 1e-12;
  p.snr = 10.0;
  const auto est = mc_outage(p, 10000, 3);
  CHECK(est.estimate == 0.0);
}

TEST_CASE("estimates replay deterministically") {
  OutageProblem p;
  p.combining = {{0.8, 2}};
  p.interfering = {{0.1, 1}};
  p.sinr_threshold = 1.2;
  p.snr = 5.0;
  const auto a = mc_outage(p, 150000, 77);  // spans multiple chunks
  const auto b = mc_outage(p, 150000, 77);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("standard error shrinks like the square root of trials") {
  OutageProblem p;
  p.combining = {{1.0, 1}};
  p.interfering = {{0.3, 1}};
  p.sinr_threshold = 1.0;
  p.snr = 10.0;
  const auto e3 = mc_outage(p, 1000, 5);
  const auto e4 = mc_outage(p, 10000, 5);
  const auto e5 = mc_outage(p, 100000, 5);
  CHECK(e3.std_error > e4.std_error);
  CHECK(e4.std_error > e5.std_error);
  CHECK(e3.std_error / e5.std_error == doctest::Approx(10.0).epsilon(0.25));
}

TEST_CASE("unit-mean fading contract for each shape") {
  for (int m : {1, 2, 3}) {
    Rng rng(1000 + static_cast<std::uint64_t>(m));
    const long n = 100000;
    double sum = 0.0;
    for (long i = 0; i < n; ++i) sum += rng.unit_mean_gamma(m);
    const double mean = sum / n;
    const double se = 1.0 / std::sqrt(static_cast<double>(m) * n);
    CHECK(std::abs(mean - 1.0) <= 3.0 * se);
  }
}

TEST_CASE("convolution oracle matches the exponential cdf") {
  const std::vector<FadingLink> combining = {{0.7, 1}};
  for (double z : {0.05, 0.4, 1.3}) {
    const double analytic = 1.0 - std::exp(-2.0 * z / 0.7);  // beta = 2
    CHECK(convolution_cdf(combining, 2.0, z) == doctest::Approx(analytic).epsilon(1e-7));
  }
}

TEST_CASE("convolution oracle at zero is zero") {
  const std::vector<FadingLink> combining = {{1.0, 2}};
  CHECK(convolution_cdf(combining, 1.0, 0.0) == 0.0);
}

TEST_CASE("gamma additivity: equal scales convolve to a higher shape") {
  const std::vector<FadingLink> combining = {{1.0, 1}, {1.0, 1}};
  const double z = 0.8;
  const double analytic = 1.0 - std::exp(-z) * (1.0 + z);  // Gamma(2,1) cdf
  CHECK(convolution_cdf(combining, 1.0, z) == doctest::Approx(analytic).epsilon(1e-7));
}

TEST_CASE("interference-free kernel agrees with the convolution oracle") {
  Rng rng(6001);
  int merged_done = 0;
  for (int inst = 0; inst < 8; ++inst) {
    OutageProblem p;
    const int terms = 1 + static_cast<int>(rng.uniform() * 4.0);
    for (int i = 0; i < terms; ++i) {
      p.combining.push_back(
          {0.3 + rng.uniform() * 2.7, 1 + static_cast<int>(rng.uniform() * 3.0)});
    }
    if (inst < 2 && terms >= 2) {  // force a merged-scale instance
      p.combining[1] = p.combining[0];
      ++merged_done;
    }
    p.sinr_threshold = 0.5 + rng.uniform() * 1.5;
    double mean = 0.0;
    for (const auto& link : p.combining) mean += link.power / p.sinr_threshold;
    const double z = mean * (0.2 + rng.uniform() * 1.3);
    p.snr = 1.0 / z;
    const double closed = conditional_outage(p);
    const double oracle = convolution_cdf(p.combining, p.sinr_threshold, z);
    CHECK(closed == doctest::Approx(oracle).epsilon(1e-6));
  }
  CHECK(merged_done >= 1);
}

TEST_CASE("validation instances are deterministic and in range") {
  const auto a = make_validation_instance(42, 7);
  const auto b = make_validation_instance(42, 7);
  CHECK(a.combining.size() == b.combining.size());
  CHECK(a.sinr_threshold == b.sinr_threshold);
  CHECK(a.snr == b.snr);
  CHECK(a.combining.size() >= 1);
  CHECK(a.combining.size() <= 3);
  CHECK(a.combining.size() + a.interfering.size() <= 8);
  CHECK(a.sinr_threshold >= 0.1);
  CHECK(a.sinr_threshold <= 10.0);
  CHECK(a.snr >= 1.0);
  CHECK(a.snr <= 100.0);
  for (const auto& link : a.combining) {
    CHECK(link.nakagami_m >= 1);
    CHECK(link.nakagami_m <= 3);
    CHECK(link.power > 0.0);
  }
}

TEST_CASE("kernel validation subset passes at desk scale") {
  const auto rows = run_kernel_validation(31337, 10, 100000);
  for (const auto& row : rows) {
    CAPTURE(row.index);
    CHECK(row.pass);
  }
}
