#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qswitch/analysis.hpp"
#include "qswitch/error.hpp"

using namespace qswitch;

namespace {

// |f|^2 is a Gaussian of the given area, centre and rms width.
OutputRecord gaussian_record(double area, double t0, double sigma, double t_end = 60, double dt = 0.01) {
  OutputRecord r;
  for (double t = 0; t <= t_end + 1e-12; t += dt) {
    const double I = area / (sigma * std::sqrt(2 * std::numbers::pi)) *
                     std::exp(-(t - t0) * (t - t0) / (2 * sigma * sigma));
    r.times.push_back(t);
    r.f_in.push_back(0);
    r.f_out.push_back(std::sqrt(I));
  }
  return r;
}

OutputRecord exponential_record(double rate, double t_end = 60, double dt = 0.01) {
  OutputRecord r;
  for (double t = 0; t <= t_end + 1e-12; t += dt) {
    r.times.push_back(t);
    r.f_in.push_back(0);
    r.f_out.push_back(std::sqrt(rate * std::exp(-rate * t)));
  }
  return r;
}

OutputRecord add(OutputRecord a, const OutputRecord& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a.f_out[i] = std::hypot(std::abs(a.f_out[i]), std::abs(b.f_out[i]));
  return a;
}

}  // namespace

TEST(Trapezoid, ExactForLinear) {
  const std::vector<double> t{0, 1, 3, 4}, y{0, 2, 6, 8};
  EXPECT_DOUBLE_EQ(trapezoid(t, y), 16.0);
}

TEST(EmittedProbability, ZeroField) {
  OutputRecord r;
  r.times = {0, 1, 2};
  r.f_in = r.f_out = {0, 0, 0};
  EXPECT_DOUBLE_EQ(emitted_probability(r), 0.0);
}

TEST(EmittedProbability, RefinementStable) {
  const auto fine = gaussian_record(0.8, 20, 3, 60, 0.01);
  const auto coarse = gaussian_record(0.8, 20, 3, 60, 0.02);
  EXPECT_NEAR(emitted_probability(fine), 0.8, 1e-9);
  EXPECT_NEAR(emitted_probability(fine), emitted_probability(coarse), 1e-4);
}

TEST(ExponentialFit, SyntheticDecay) {
  std::vector<double> t, y;
  for (double x = 0; x <= 400; x += 0.5) {
    t.push_back(x);
    y.push_back(std::exp(-0.01 * x));
  }
  EXPECT_NEAR(fit_exponential_rate(t, y), 0.01, 1e-6);
}

TEST(ExponentialFit, Errors) {
  std::vector<double> t{0, 1, 2}, flat{1, 0.99, 0.98};
  try {
    fit_exponential_rate(t, flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientDecay);
  }
  std::vector<double> few{1, 0.5, 0.01};
  try {
    fit_exponential_rate(t, few);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

TEST(GaussianFit, RecoversExactPulse) {
  const auto r = gaussian_record(1, 20, 3);
  const auto unit = fit_gaussian(r, true);
  EXPECT_NEAR(unit.center, 20, 1e-6);
  EXPECT_NEAR(unit.sigma, 3, 1e-6);
  EXPECT_DOUBLE_EQ(unit.area, 1.0);
  const auto free = fit_gaussian(gaussian_record(0.6, 25, 2), false);
  EXPECT_NEAR(free.area, 0.6, 1e-6);
  EXPECT_NEAR(free.center, 25, 1e-6);
  EXPECT_NEAR(free.sigma, 2, 1e-6);
}

TEST(GaussianFit, AsymmetricPulseHasLargerResidual) {
  const auto sym = fit_gaussian(gaussian_record(1, 20, 3), true);
  const auto expo = fit_gaussian(exponential_record(0.5), true);
  EXPECT_GT(expo.residual, 100 * std::max(sym.residual, 1e-9));
}

TEST(GaussianFit, NoPulse) {
  try {
    fit_gaussian(gaussian_record(1e-5, 20, 3), true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPulse);
  }
}

TEST(ModeMismatch, ExactGaussianIsZero) {
  const auto r = gaussian_record(1, 20, 3);
  EXPECT_NEAR(mode_mismatch(r, fit_gaussian(r, true)), 0.0, 1e-8);
}

// Oracle: two Gaussians of width s1, s2 and equal centres overlap as
// sqrt(2 s1 s2 / (s1^2 + s2^2)) in amplitude.
TEST(ModeMismatch, KnownOverlap) {
  const auto r = gaussian_record(1, 30, 3);
  GaussianFit g;
  g.area = 1;
  g.center = 30;
  g.sigma = 4;
  EXPECT_NEAR(mode_mismatch(r, g), 1 - std::sqrt(2 * 3.0 * 4.0 / (9 + 16)), 1e-8);
}

TEST(ModeMismatch, NotRenormalized) {
  const auto r = gaussian_record(0.81, 20, 3);
  EXPECT_NEAR(mode_mismatch(r, fit_gaussian(r, false)), 1 - 0.9, 1e-6);
}

TEST(Segments, SinglePulse) {
  const auto r = gaussian_record(0.9, 20, 3);
  const auto segs = segment_pulses(r);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_NEAR(segs[0].area, 0.9, 1e-3);
  EXPECT_NEAR(segs[0].center, 20, 1e-3);
}

TEST(Segments, TwoSeparatedPulses) {
  const auto r = add(gaussian_record(0.5, 20, 2, 100), gaussian_record(0.5, 70, 2, 100));
  const auto segs = segment_pulses(r);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_NEAR(segs[0].area, 0.5, 1e-3);
  EXPECT_NEAR(segs[1].center, 70, 1e-3);
  EXPECT_LT(segs[0].t_end, segs[1].t_start);
}

// windows end where the intensity drops below the threshold, clipping ~1e-5 of the tails
TEST(Segments, PerPulseMismatchIsAreaFree) {
  const auto r = add(gaussian_record(0.3, 20, 2, 100), gaussian_record(0.7, 70, 3, 100));
  for (const auto& s : segment_pulses(r)) EXPECT_NEAR(pulse_mode_mismatch(r, s), 0.0, 1e-4);
}

TEST(Lobes, RingingVersusSmooth) {
  OutputRecord ring;
  for (double t = 0; t <= 40; t += 0.01) {
    ring.times.push_back(t);
    ring.f_in.push_back(0);
    ring.f_out.push_back(std::exp(-0.1 * t) * std::sin(t));
  }
  // second lobe at t ~ pi + pi/2 over first at ~pi/2
  const double expect = std::exp(-0.2 * std::numbers::pi);
  EXPECT_NEAR(secondary_lobe_ratio(ring), expect, 0.02);
  EXPECT_LT(secondary_lobe_ratio(gaussian_record(1, 20, 3)), 1e-12);
}

TEST(Skewness, GaussianAndExponential) {
  EXPECT_NEAR(intensity_skewness(gaussian_record(1, 30, 3)), 0.0, 1e-6);
  // exponential distribution has skewness 2
  EXPECT_NEAR(intensity_skewness(exponential_record(1, 60, 0.001)), 2.0, 1e-3);
}

TEST(Metrics, PulseMetricsOfGaussian) {
  const auto m = pulse_metrics(gaussian_record(1, 20, 3));
  EXPECT_NEAR(m.P_out, 1, 1e-9);
  EXPECT_NEAR(m.xi, 0, 1e-8);
  EXPECT_EQ(m.pulses.size(), 1u);
}

TEST(Slice, Bounds) {
  const auto r = gaussian_record(1, 20, 3);
  const auto s = slice(r, 10, 20);
  EXPECT_GE(s.times.front(), 10 - 1e-12);
  EXPECT_LE(s.times.back(), 20 + 1e-12);
  EXPECT_EQ(s.size(), s.f_out.size());
}
