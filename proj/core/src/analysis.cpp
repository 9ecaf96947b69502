#include "qswitch/analysis.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>

#include "qswitch/error.hpp"

namespace qswitch {

double GaussianFit::intensity(double t) const {
  const double x = (t - center) / sigma;
  return area / (sigma * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * x * x);
}

double GaussianFit::unit_amplitude(double t) const {
  const double x = (t - center) / sigma;
  return std::sqrt(1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi))) * std::exp(-0.25 * x * x);
}

double trapezoid(std::span<const double> t, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) sum += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

double emitted_probability(const OutputRecord& record) {
  const auto intensity = record.intensity();
  return trapezoid(record.times, intensity);
}

double fit_exponential_rate(std::span<const double> t, std::span<const double> y,
                            DecayWindow window) {
  if (t.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "time and value series differ in length");
  }
  const double lowest = y.empty() ? 1.0 : *std::min_element(y.begin(), y.end());
  if (lowest >= window.upper) {
    throw Error(ErrorCode::InsufficientDecay,
                "series never drops below " + std::to_string(window.upper));
  }
  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] < window.lower || y[i] > window.upper) continue;
    const double v = -std::log(y[i]);
    n += 1.0;
    sx += t[i];
    sy += v;
    sxx += t[i] * t[i];
    sxy += t[i] * v;
  }
  if (n < 10.0) {
    throw Error(ErrorCode::TooFewPoints, "only " + std::to_string(static_cast<int>(n)) +
                                             " samples inside the decay window");
  }
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

namespace {

struct FitData {
  std::span<const double> t;
  std::span<const double> intensity;
  bool unit_area;
};

// Parameters: (center, log sigma[, log area]).
GaussianFit unpack(const gsl_vector* x, bool unit_area) {
  GaussianFit g;
  g.center = gsl_vector_get(x, 0);
  g.sigma = std::exp(gsl_vector_get(x, 1));
  g.area = unit_area ? 1.0 : std::exp(gsl_vector_get(x, 2));
  return g;
}

double rms_residual(const GaussianFit& g, std::span<const double> t, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - g.intensity(t[i]);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(t.size()));
}

double objective(const gsl_vector* x, void* params) {
  const auto* data = static_cast<const FitData*>(params);
  return rms_residual(unpack(x, data->unit_area), data->t, data->intensity);
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

GaussianFit fit_gaussian(std::span<const double> t, std::span<const double> y, bool unit_area) {
  if (t.size() != y.size() || t.size() < 5) {
    throw Error(ErrorCode::InvalidArgument, "Gaussian fit needs matching series of >= 5 samples");
  }
  const double area = trapezoid(t, y);
  if (area < 1e-3) {
    throw Error(ErrorCode::NoPulse, "pulse area " + std::to_string(area) + " below 1e-3");
  }
  std::vector<double> ty(t.size()), t2y(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) ty[i] = t[i] * y[i];
  const double mean = trapezoid(t, ty) / area;
  for (std::size_t i = 0; i < t.size(); ++i) t2y[i] = (t[i] - mean) * (t[i] - mean) * y[i];
  const double variance = trapezoid(t, t2y) / area;
  const double sigma0 = std::sqrt(std::max(variance, 1e-12));

  // GSL's default handler aborts; failures are reported through status codes.
  static std::once_flag handler_once;
  std::call_once(handler_once, [] { gsl_set_error_handler_off(); });

  const std::size_t dim = unit_area ? 2 : 3;
  FitData data{t, y, unit_area};
  gsl_multimin_function fn{&objective, dim, &data};

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(dim));
  gsl_vector_set(x.get(), 0, mean);
  gsl_vector_set(x.get(), 1, std::log(sigma0));
  gsl_vector_set(step.get(), 0, 0.1 * sigma0);
  gsl_vector_set(step.get(), 1, 0.1);
  if (!unit_area) {
    gsl_vector_set(x.get(), 2, std::log(area));
    gsl_vector_set(step.get(), 2, 0.1);
  }

  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
  gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());

  // Two passes: restarting the simplex at the first optimum guards against
  // premature collapse along a valley.
  for (int pass = 0; pass < 2; ++pass) {
    int status = GSL_CONTINUE;
    for (int iter = 0; iter < 20000 && status == GSL_CONTINUE; ++iter) {
      const int step_status = gsl_multimin_fminimizer_iterate(minimizer.get());
      const double size = gsl_multimin_fminimizer_size(minimizer.get());
      if (step_status != GSL_SUCCESS) {
        // No progress possible: the simplex has collapsed to rounding level.
        status = step_status == GSL_ENOPROG && size < 1e-6 ? GSL_SUCCESS : step_status;
        break;
      }
      status = gsl_multimin_test_size(size, 1e-6);
    }
    if (status != GSL_SUCCESS) {
      throw Error(ErrorCode::NonConvergence, "Gaussian fit simplex did not converge (status " + std::to_string(status) + ", size " + std::to_string(gsl_multimin_fminimizer_size(minimizer.get()) * 1e9) + "e-9" + ")");
    }
    if (pass == 0) {
      gsl_vector_memcpy(x.get(), gsl_multimin_fminimizer_x(minimizer.get()));
      for (std::size_t k = 0; k < dim; ++k) gsl_vector_set(step.get(), k, 1e-3);
      gsl_vector_set(step.get(), 0, 1e-3 * sigma0);
      gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());
    }
  }

  auto fit = unpack(gsl_multimin_fminimizer_x(minimizer.get()), unit_area);
  fit.residual = rms_residual(fit, t, y);
  return fit;
}

GaussianFit fit_gaussian(const OutputRecord& record, bool unit_area) {
  const auto intensity = record.intensity();
  return fit_gaussian(record.times, intensity, unit_area);
}

double mode_mismatch(const OutputRecord& record, const GaussianFit& fit) {
  std::vector<double> product(record.size());
  for (std::size_t i = 0; i < record.size(); ++i) {
    product[i] = std::abs(record.f_out[i]) * fit.unit_amplitude(record.times[i]);
  }
  return 1.0 - trapezoid(record.times, product);
}

OutputRecord slice(const OutputRecord& record, double t_start, double t_end) {
  OutputRecord out;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (record.times[i] < t_start || record.times[i] > t_end) continue;
    out.times.push_back(record.times[i]);
    out.f_in.push_back(record.f_in[i]);
    out.f_out.push_back(record.f_out[i]);
  }
  return out;
}

double pulse_mode_mismatch(const OutputRecord& record, const PulseSegment& segment) {
  const auto part = slice(record, segment.t_start, segment.t_end);
  const double area = emitted_probability(part);
  const auto fit = fit_gaussian(part, false);
  return 1.0 - (1.0 - mode_mismatch(part, fit)) / std::sqrt(area);
}

std::vector<PulseSegment> segment_pulses(const OutputRecord& record, double threshold_fraction,
                                         double min_gap) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold fraction must lie in (0, 1)");
  }
  const auto intensity = record.intensity();
  if (intensity.empty()) return {};
  const double peak = *std::max_element(intensity.begin(), intensity.end());
  if (peak <= 0.0) return {};
  const double threshold = threshold_fraction * peak;

  // Index ranges [first, last] above threshold.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < intensity.size(); ++i) {
    if (intensity[i] < threshold) continue;
    if (!runs.empty() && runs.back().second + 1 == i) {
      runs.back().second = i;
    } else if (!runs.empty() && record.times[i] - record.times[runs.back().second] < min_gap) {
      runs.back().second = i;
    } else {
      runs.emplace_back(i, i);
    }
  }

  std::vector<PulseSegment> out;
  for (const auto& [first, last] : runs) {
    const auto n = last - first + 1;
    std::span<const double> t(record.times.data() + first, n);
    std::span<const double> y(intensity.data() + first, n);
    std::vector<double> ty(n);
    for (std::size_t i = 0; i < n; ++i) ty[i] = t[i] * y[i];
    const double area = trapezoid(t, y);
    out.push_back({t.front(), t.back(), area, area > 0.0 ? trapezoid(t, ty) / area : t.front()});
  }
  return out;
}

double secondary_lobe_ratio(const OutputRecord& record) {
  const auto y = record.intensity();
  if (y.size() < 3) return 0.0;
  const auto peak_it = std::max_element(y.begin(), y.end());
  const double peak = *peak_it;
  if (peak <= 0.0) return 0.0;
  const auto peak_index = static_cast<std::size_t>(peak_it - y.begin());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());

  // Lowest point crossed walking from i in direction dir before reaching
  // higher ground; nullopt when the walk runs off the record first.
  auto saddle = [&](std::ptrdiff_t i, std::ptrdiff_t dir) -> std::optional<double> {
    double low = y[static_cast<std::size_t>(i)];
    for (std::ptrdiff_t j = i + dir; j >= 0 && j < n; j += dir) {
      const double v = y[static_cast<std::size_t>(j)];
      if (v > y[static_cast<std::size_t>(i)]) return low;
      low = std::min(low, v);
    }
    return std::nullopt;
  };

  double second = 0.0;
  for (std::ptrdiff_t i = 1; i + 1 < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (u == peak_index || !(y[u] > y[u - 1] && y[u] >= y[u + 1]) || y[u] <= second) continue;
    const auto left = saddle(i, -1);
    const auto right = saddle(i, +1);
    const double col = std::max(left.value_or(0.0), right.value_or(0.0));
    if (y[u] - col >= 0.5 * y[u]) second = y[u];
  }
  return second / peak;
}

double intensity_skewness(const OutputRecord& record) {
  const auto y = record.intensity();
  const auto& t = record.times;
  const double area = trapezoid(t, y);
  if (area <= 0.0) return 0.0;
  std::vector<double> w(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) w[i] = t[i] * y[i];
  const double mean = trapezoid(t, w) / area;
  auto central = [&](int order) {
    for (std::size_t i = 0; i < t.size(); ++i) w[i] = std::pow(t[i] - mean, order) * y[i];
    return trapezoid(t, w) / area;
  };
  const double var = central(2);
  return var > 0.0 ? central(3) / std::pow(var, 1.5) : 0.0;
}

PulseMetrics pulse_metrics(const OutputRecord& record) {
  PulseMetrics m;
  m.P_out = emitted_probability(record);
  m.gaussian = fit_gaussian(record, true);
  m.xi = mode_mismatch(record, m.gaussian);
  m.pulses = segment_pulses(record);
  return m;
}

}  // namespace qswitch
