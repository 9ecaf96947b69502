#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qswitch/error.hpp"
#include "qswitch/protocols.hpp"

using namespace qswitch;

namespace {

ScenarioParams two_level(double kappa_wq = 5) {
  ScenarioParams p;
  p.g_s = 5;
  p.g_q = 20;
  p.delta_q = 2;
  p.kappa_wq = kappa_wq;
  return p;
}

ScenarioParams three_level() {
  ScenarioParams p;
  p.levels_s = 3;
  p.g_s = 1;
  p.Omega_s = {4.94};
  p.delta_s_i = {0};
  p.g_q = 10;
  p.delta_q = -15;
  p.Delta_q = -8.6;
  p.kappa_wq = 4;
  return p;
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(SwitchPoints, ClosedForms) {
  const auto sp = switch_points(two_level());
  EXPECT_DOUBLE_EQ(sp.off, -5.0);
  EXPECT_NEAR(sp.res, 52.142857142857, 1e-9);
}

TEST(Confinement, LosslessHasNothingToFit) {
  EXPECT_EQ(error_of([] { confinement_run(two_level(), {1e3, 0.37, 0.05}); }), ErrorCode::InsufficientDecay);
}

TEST(Confinement, StorageCavityLossHalved) {
  auto p = two_level();
  p.kappa_s = 1e-2;
  const auto r = confinement_run(p);
  EXPECT_NEAR(r.rate / (p.kappa_s / 2), 1.0, 0.1);
  EXPECT_DOUBLE_EQ(r.Delta_q, -5.0);
  EXPECT_LE(r.final_survival, 0.37 + 1e-6);
}

TEST(Confinement, LeakageAtOffPoint) {
  const auto p = two_level();
  IntegratorSettings s;
  s.t_end = 100;
  s.sample_interval = 0.1;
  const auto run = integrate(p, SweepProfile::constant(Knob::DeltaQ, -5),
                             storage_branch_state(p, 0, 1), DriveField::zero(), s);
  const auto n = run.trajectory.size() - 1;
  const double lost = run.trajectory.emitted[n] + run.trajectory.dissipated[n].total();
  EXPECT_LE(lost, 5e-3);
  EXPECT_GT(lost, 1e-5);
}

TEST(LeakageMap, MinimumAtOffMaximumNearResonance) {
  const std::vector<double> Dq{-15, -10, -5, 0, 20, 45, 50, 52, 55, 60};
  const std::vector<double> dq{2};
  const auto map = leakage_map(two_level(), Dq, dq, 2);
  std::size_t imin = 0, imax = 0;
  for (std::size_t i = 0; i < Dq.size(); ++i) {
    if (map.at(i, 0).rate < map.at(imin, 0).rate) imin = i;
    if (map.at(i, 0).rate > map.at(imax, 0).rate) imax = i;
  }
  EXPECT_DOUBLE_EQ(Dq[imin], -5.0);
  EXPECT_DOUBLE_EQ(Dq[imax], 52.0);
}

TEST(LeakageMap, NoOutputChannel) {
  const auto map = leakage_map(two_level(0), {-5, 20}, {0, 2}, 2, 50);
  for (const auto& c : map.cells) EXPECT_TRUE(c.below_threshold);
}

TEST(LeakageMap, GridOrderIndependentOfWorkers) {
  const std::vector<double> Dq{-10, 10, 50}, dq{-2, 2};
  const auto a = leakage_map(two_level(), Dq, dq, 1, 200);
  const auto b = leakage_map(two_level(), Dq, dq, 3, 200);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].rate, b.cells[k].rate);
    EXPECT_EQ(a.cells[k].Delta_q, b.cells[k].Delta_q);
  }
}

TEST(Passive, RingingAndAsymmetry) {
  const auto runs = passive_emission(two_level(), {0.5, 2, 10}, 80);
  EXPECT_GT(secondary_lobe_ratio(runs[0].output), 0.1);
  EXPECT_LT(secondary_lobe_ratio(runs[1].output), 0.01);
  EXPECT_GT(intensity_skewness(runs[2].output), 0.5);
  EXPECT_GT(fit_gaussian(runs[2].output, true).residual, 0.0);
}

TEST(Shaped, LinearSweepNearGaussian) {
  const auto r = shaped_emission_linear(two_level(5), 13);
  EXPECT_GT(r.metrics.P_out, 0.99);
  EXPECT_NEAR(r.metrics.xi, 0.033, 0.015);
  EXPECT_NEAR(r.run.trajectory.ledger_total(r.run.trajectory.size() - 1), 1.0, 1e-6);
  // width of the same order as T
  EXPECT_GT(r.metrics.gaussian.sigma, 13.0 / 10);
  EXPECT_LT(r.metrics.gaussian.sigma, 13.0);
  ASSERT_TRUE(r.adiabaticity.has_value());
  EXPECT_GT(r.adiabaticity->value, 0.0);
}

TEST(Shaped, PassiveMismatchLarger) {
  const auto shaped = shaped_emission_linear(two_level(10), 18);
  const auto passive = passive_emission(two_level(), {10}, 80);
  EXPECT_GT(pulse_metrics(passive[0].output).xi, 3 * shaped.metrics.xi);
}

TEST(Shaped, DecoupledStorageAtomNarrowsPulse) {
  auto p = two_level(5);
  const auto with_atom = shaped_emission_linear(p, 13);
  p.g_s = 0;
  const auto bare = shaped_emission_linear(p, 13);
  EXPECT_GT(bare.metrics.P_out, 0.99);
  EXPECT_LT(bare.metrics.gaussian.sigma, with_atom.metrics.gaussian.sigma);
  EXPECT_FALSE(bare.adiabaticity.has_value());
}

TEST(Shaped, RejectsDeltaSSweep) {
  EXPECT_EQ(error_of([] { run_emission(two_level(), SweepProfile::linear(Knob::DeltaS, 0, 10, 0, 1)); }),
            ErrorCode::InvalidArgument);
}

TEST(Reconstruction, WarpOfGaussianTrialIsIdentity) {
  const auto sweep = SweepProfile::linear(Knob::DeltaQ, 0, 40, -5, 60);
  OutputRecord r;
  const double c = 20, w = 3;
  for (double t = 0; t <= 60; t += 0.01) {
    r.times.push_back(t);
    r.f_in.push_back(0);
    r.f_out.push_back(std::sqrt(std::exp(-(t - c) * (t - c) / (2 * w * w)) / (w * std::sqrt(2 * std::numbers::pi))));
  }
  const auto warped = warp_sweep(sweep, r, c, w, 400);
  for (double t = 0; t <= 40; t += 0.5) EXPECT_NEAR(warped(t), sweep(t), 1e-3) << t;
}

TEST(Reconstruction, ImprovesTrial) {
  const auto trial = shaped_emission_linear(two_level(1), 24);
  const auto rec = reconstruct_sweep(trial);
  EXPECT_TRUE(rec.improved);
  EXPECT_LT(rec.best.metrics.xi, trial.metrics.xi);
  EXPECT_GE(rec.best.metrics.P_out, 0.99);
  EXPECT_EQ(rec.xi_history.front(), trial.metrics.xi);
  EXPECT_EQ(rec.steps.size() + 1, rec.xi_history.size());
}

TEST(Dissipation, BaselineAndMonotone) {
  const auto pts = dissipation_scan_switching(two_level(1), DissipationChannel::KappaQ, {0, 0.01, 0.1, 1}, 24, {}, 2);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_GT(pts[0].P_out, 0.99);
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i].P_out, pts[i - 1].P_out);
  for (const auto& p : pts) EXPECT_NEAR(p.P_out + p.dissipated, 1.0, 1e-3);
}

TEST(Qudit, EqualSuperposition) {
  const double a = 1 / std::sqrt(2.0);
  const auto r = qudit_emission(three_level(), {a, a});
  ASSERT_EQ(r.pulses.size(), 2u);
  EXPECT_EQ(r.pulse_branch, (std::vector<int>{2, 1}));
  EXPECT_NEAR(r.pulses[0].area, 0.5, 0.02);
  EXPECT_NEAR(r.pulses[1].area, 0.5, 0.02);
  EXPECT_LT(r.pulses[0].t_end, r.pulses[1].t_start + 1e-9);
  EXPECT_LE(r.premature_loss, 1e-2);
}

TEST(Qudit, SingleBranchGivesOnePulse) {
  const auto r = qudit_emission(three_level(), {1, 0});
  ASSERT_EQ(r.pulses.size(), 1u);
  EXPECT_EQ(r.pulse_branch[0], 1);
  EXPECT_GT(r.pulses[0].area, 0.98);
}

TEST(Qudit, InputChecks) {
  EXPECT_EQ(error_of([] { qudit_emission(three_level(), {1, 1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([] { qudit_emission(three_level(), {1}); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(error_of([] { qudit_emission(two_level(), {1}); }), ErrorCode::InvalidArgument);
}

TEST(Qudit, TightPlanOverlaps) {
  QuditTiming t;
  t.leg = 5;
  t.hold_end = 1;
  const double a = 1 / std::sqrt(2.0);
  EXPECT_EQ(error_of([&] { qudit_emission(three_level(), {a, a}, t); }), ErrorCode::PulseOverlap);
}

TEST(Capture, ZeroDrive) {
  const auto cap = capture_run(two_level(), SweepProfile::linear(Knob::DeltaQ, 0, 20, 60, -5), DriveField::zero());
  EXPECT_EQ(cap.captured, 0.0);
  EXPECT_EQ(cap.incident, 0.0);
}

TEST(Capture, MirroredBeatsWideGaussian) {
  const auto emission = shaped_emission_linear(two_level(5), 13);
  const auto mirrored = capture_mirrored(emission);
  EXPECT_GE(mirrored.captured, 0.95 * emission.metrics.P_out);
  EXPECT_NEAR(mirrored.incident, emission.metrics.P_out, 1e-3);

  const auto& out = emission.run.output;
  const double t0 = out.times.front(), t1 = out.times.back();
  const double w = 2 * emission.metrics.gaussian.sigma;
  auto pts = emission.sweep.breakpoints();
  pts.push_back({t1, pts.back().value});
  const auto reversed = SweepProfile(Knob::DeltaQ, pts).reversed();
  const auto wide = capture_run(emission.params, reversed,
                                DriveField::gaussian(std::pow(2 * std::numbers::pi * w * w, -0.25),
                                                     t0 + t1 - emission.metrics.gaussian.center, w));
  EXPECT_LT(wide.captured, mirrored.captured);
}
