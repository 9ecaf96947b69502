#include "qswitch/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "qswitch/error.hpp"

namespace qswitch {

std::string to_string(Knob knob) { return knob == Knob::DeltaS ? "Delta_s" : "Delta_q"; }

Knob knob_from_string(const std::string& name) {
  if (name == "Delta_s") return Knob::DeltaS;
  if (name == "Delta_q") return Knob::DeltaQ;
  throw Error(ErrorCode::InvalidArgument, "unknown sweep knob '" + name + "'");
}

SweepProfile::SweepProfile(Knob knob, std::vector<Breakpoint> breakpoints)
    : knob_(knob), points_(std::move(breakpoints)) {
  if (points_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sweep needs at least one breakpoint");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].t) || !std::isfinite(points_[i].value)) {
      throw Error(ErrorCode::NonFiniteValue, "sweep breakpoint is not finite");
    }
    if (i > 0 && !(points_[i].t > points_[i - 1].t)) {
      throw Error(ErrorCode::InvalidArgument, "sweep breakpoint times must increase strictly");
    }
  }
}

SweepProfile SweepProfile::constant(Knob knob, double value) {
  return SweepProfile(knob, {{0.0, value}});
}

SweepProfile SweepProfile::linear(Knob knob, double t_start, double t_end, double value_start,
                                  double value_end) {
  return SweepProfile(knob, {{t_start, value_start}, {t_end, value_end}});
}

SweepProfile SweepProfile::from_segments(Knob knob, std::span<const Segment> segments) {
  if (segments.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sweep needs at least one segment");
  }
  std::vector<Breakpoint> pts;
  pts.push_back({segments.front().t_start, segments.front().value_start});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.t_end > s.t_start)) {
      throw Error(ErrorCode::InvalidArgument, "sweep segment has non-positive duration");
    }
    if (i > 0) {
      const auto& prev = segments[i - 1];
      if (s.t_start != prev.t_end) {
        throw Error(ErrorCode::InvalidArgument, "sweep segments must be contiguous");
      }
      if (s.value_start != prev.value_end) {
        throw Error(ErrorCode::InvalidArgument,
                    "sweep segments must be continuous in value at shared endpoints");
      }
    }
    pts.push_back({s.t_end, s.value_end});
  }
  return SweepProfile(knob, std::move(pts));
}

double SweepProfile::operator()(double t) const {
  if (t <= points_.front().t) return points_.front().value;
  if (t >= points_.back().t) return points_.back().value;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t; });
  auto lo = hi - 1;
  const double w = (t - lo->t) / (hi->t - lo->t);
  return lo->value + w * (hi->value - lo->value);
}

double SweepProfile::rate(double t) const {
  if (points_.size() < 2 || t < points_.front().t || t >= points_.back().t) return 0.0;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t; });
  auto lo = hi - 1;
  return (hi->value - lo->value) / (hi->t - lo->t);
}

SweepProfile SweepProfile::reversed() const {
  const double a = t_begin();
  const double b = t_end();
  std::vector<Breakpoint> pts;
  pts.reserve(points_.size());
  for (auto it = points_.rbegin(); it != points_.rend(); ++it) {
    pts.push_back({a + b - it->t, it->value});
  }
  return SweepProfile(knob_, std::move(pts));
}

SweepProfile SweepProfile::shifted(double dt) const {
  auto pts = points_;
  for (auto& p : pts) p.t += dt;
  return SweepProfile(knob_, std::move(pts));
}

}  // namespace qswitch
