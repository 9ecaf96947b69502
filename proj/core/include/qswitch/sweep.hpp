#pragma once

#include <span>
#include <string>
#include <vector>

namespace qswitch {

enum class Knob { DeltaS, DeltaQ };

std::string to_string(Knob knob);
Knob knob_from_string(const std::string& name);

/// Piecewise-linear detuning trajectory for one knob. Stored as breakpoints
/// (t_k, value_k) with t strictly increasing; evaluation clamps to the end
/// values outside [t_front, t_back].
class SweepProfile {
 public:
  struct Breakpoint {
    double t;
    double value;
  };

  struct Segment {
    double t_start;
    double t_end;
    double value_start;
    double value_end;
  };

  SweepProfile() = default;
  SweepProfile(Knob knob, std::vector<Breakpoint> breakpoints);

  static SweepProfile constant(Knob knob, double value);
  static SweepProfile linear(Knob knob, double t_start, double t_end, double value_start,
                             double value_end);
  /// Segments must be contiguous (t_end of one equals t_start of the next,
  /// values may jump only if the duration of the jump is nonzero).
  static SweepProfile from_segments(Knob knob, std::span<const Segment> segments);

  Knob knob() const { return knob_; }
  const std::vector<Breakpoint>& breakpoints() const { return points_; }
  double t_begin() const { return points_.front().t; }
  double t_end() const { return points_.back().t; }

  double operator()(double t) const;
  /// d(value)/dt; right-sided at breakpoints, zero outside the span.
  double rate(double t) const;

  /// Mirror image in time about the span: value'(t) = value(t_begin + t_end - t).
  SweepProfile reversed() const;
  /// Same trajectory shifted by dt in time.
  SweepProfile shifted(double dt) const;

 private:
  Knob knob_ = Knob::DeltaQ;
  std::vector<Breakpoint> points_{{0.0, 0.0}};
};

}  // namespace qswitch
