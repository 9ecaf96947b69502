#include <gtest/gtest.h>

#include <vector>

#include "qswitch/error.hpp"
#include "qswitch/sweep.hpp"

using namespace qswitch;

TEST(Sweep, LinearInterpolatesAndClamps) {
  const auto s = SweepProfile::linear(Knob::DeltaQ, 2.0, 12.0, -5.0, 15.0);
  EXPECT_DOUBLE_EQ(s(0.0), -5.0);
  EXPECT_DOUBLE_EQ(s(2.0), -5.0);
  EXPECT_DOUBLE_EQ(s(7.0), 5.0);
  EXPECT_DOUBLE_EQ(s(12.0), 15.0);
  EXPECT_DOUBLE_EQ(s(100.0), 15.0);
  EXPECT_DOUBLE_EQ(s.rate(5.0), 2.0);
  EXPECT_DOUBLE_EQ(s.rate(1.0), 0.0);
  EXPECT_DOUBLE_EQ(s.rate(12.0), 0.0);
}

TEST(Sweep, ConstantHasZeroRate) {
  const auto s = SweepProfile::constant(Knob::DeltaS, 3.5);
  for (double t : {-1.0, 0.0, 4.0, 1e3}) {
    EXPECT_DOUBLE_EQ(s(t), 3.5);
    EXPECT_DOUBLE_EQ(s.rate(t), 0.0);
  }
}

TEST(Sweep, SegmentsJoin) {
  const std::vector<SweepProfile::Segment> segs{{0, 5, -3, -3}, {5, 45, -3, 4}, {45, 90, 4, 4}};
  const auto s = SweepProfile::from_segments(Knob::DeltaS, segs);
  EXPECT_EQ(s.breakpoints().size(), 4u);
  EXPECT_DOUBLE_EQ(s(25.0), 0.5);
  EXPECT_DOUBLE_EQ(s(60.0), 4.0);
  EXPECT_DOUBLE_EQ(s.rate(10.0), 7.0 / 40.0);
  EXPECT_EQ(s.knob(), Knob::DeltaS);
}

TEST(Sweep, RejectsGapsAndJumps) {
  const std::vector<SweepProfile::Segment> gap{{0, 5, 0, 1}, {6, 8, 1, 2}};
  EXPECT_THROW(SweepProfile::from_segments(Knob::DeltaQ, gap), Error);
  const std::vector<SweepProfile::Segment> jump{{0, 5, 0, 1}, {5, 8, 2, 2}};
  EXPECT_THROW(SweepProfile::from_segments(Knob::DeltaQ, jump), Error);
  EXPECT_THROW(SweepProfile(Knob::DeltaQ, {{0, 0}, {0, 1}}), Error);
  EXPECT_THROW(SweepProfile(Knob::DeltaQ, {}), Error);
}

TEST(Sweep, ReversedMirrorsInTime) {
  const auto s = SweepProfile(Knob::DeltaQ, {{1, 0}, {3, 10}, {9, 12}});
  const auto r = s.reversed();
  EXPECT_DOUBLE_EQ(r.t_begin(), 1.0);
  EXPECT_DOUBLE_EQ(r.t_end(), 9.0);
  for (double t = 1.0; t <= 9.0; t += 0.25) EXPECT_NEAR(r(t), s(10.0 - t), 1e-12);
  const auto rr = r.reversed();
  EXPECT_EQ(rr.breakpoints().size(), s.breakpoints().size());
  for (double t = 0.0; t <= 10.0; t += 0.5) EXPECT_NEAR(rr(t), s(t), 1e-12);
}

TEST(Sweep, Shifted) {
  const auto s = SweepProfile::linear(Knob::DeltaQ, 0, 10, 0, 1).shifted(5);
  EXPECT_DOUBLE_EQ(s.t_begin(), 5.0);
  EXPECT_DOUBLE_EQ(s(10.0), 0.5);
}

TEST(Sweep, KnobNames) {
  EXPECT_EQ(to_string(Knob::DeltaQ), "Delta_q");
  EXPECT_EQ(knob_from_string("Delta_s"), Knob::DeltaS);
  EXPECT_THROW(knob_from_string("delta"), Error);
}
