#pragma once

#include <span>
#include <vector>

#include "qswitch/model.hpp"

namespace qswitch {

/// Intensity model |g(t)|^2 = area / (sigma sqrt(2 pi)) exp(-(t - t0)^2 / (2 sigma^2)).
struct GaussianFit {
  double area = 0.0;
  double center = 0.0;
  double sigma = 1.0;
  double residual = 0.0;  // RMS of |f_out|^2 - |g|^2 over the fitted samples

  double intensity(double t) const;
  /// |g(t)| for the unit-area version of this fit.
  double unit_amplitude(double t) const;
};

struct PulseSegment {
  double t_start;
  double t_end;
  double area;
  double center;
};

struct PulseMetrics {
  double P_out = 0.0;
  double xi = 0.0;
  GaussianFit gaussian;
  std::vector<PulseSegment> pulses;
};

/// Trapezoidal integral of y over increasing t.
double trapezoid(std::span<const double> t, std::span<const double> y);

/// P_out = integral |f_out|^2 dt.
double emitted_probability(const OutputRecord& record);

struct DecayWindow {
  double lower = 0.05;
  double upper = 0.95;
};

/// Least-squares slope of -ln y against t over samples with y inside the
/// window. Throws InsufficientDecay if y never falls below the window's upper
/// edge, TooFewPoints if fewer than 10 samples qualify.
double fit_exponential_rate(std::span<const double> t, std::span<const double> y,
                            DecayWindow window = {});

/// Moment initialization followed by Nelder-Mead refinement of the RMS
/// intensity residual. With unit_area the area is pinned to 1. Throws NoPulse
/// when the record carries less than 1e-3 probability, NonConvergence when the
/// simplex does not collapse.
GaussianFit fit_gaussian(const OutputRecord& record, bool unit_area);
GaussianFit fit_gaussian(std::span<const double> t, std::span<const double> intensity,
                         bool unit_area);

/// xi = 1 - integral |f_out(t)| |g(t)| dt with g the unit-area version of the fit.
double mode_mismatch(const OutputRecord& record, const GaussianFit& fit);

/// Mismatch of one pulse of a pulse train: the pulse is renormalized by its
/// own area and compared with a free Gaussian fit over the segment.
double pulse_mode_mismatch(const OutputRecord& record, const PulseSegment& segment);

/// Maximal runs with |f_out|^2 >= threshold_fraction * peak, merged across
/// sub-threshold gaps shorter than min_gap.
std::vector<PulseSegment> segment_pulses(const OutputRecord& record,
                                         double threshold_fraction = 1e-4, double min_gap = 1.0);

/// Largest lobe of |f_out|^2 other than the global peak, relative to it. A
/// local maximum counts as a lobe when the dip separating it from higher
/// ground goes below half its height, so fast beating on a slope is ignored.
double secondary_lobe_ratio(const OutputRecord& record);

/// Third standardized moment of the time distribution weighted by |f_out|^2.
double intensity_skewness(const OutputRecord& record);

PulseMetrics pulse_metrics(const OutputRecord& record);

/// The part of a record with t in [t_start, t_end].
OutputRecord slice(const OutputRecord& record, double t_start, double t_end);

}  // namespace qswitch
