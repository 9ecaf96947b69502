#include "qswitch/protocols.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "qswitch/error.hpp"
#include "parallel.hpp"

namespace qswitch {

namespace {

ComplexVector emission_initial_state(const ScenarioParams& p) {
  if (p.g_s == 0.0) return photon_s_state(p);
  return storage_branch_state(p, p.Delta_s, 1);
}

std::vector<double> emission_reference(const ScenarioParams& p) {
  if (p.g_s == 0.0) {
    std::vector<double> v(manifold_dimension(p), 0.0);
    v[photon_s_index()] = 1.0;
    return v;
  }
  return storage_state(p, p.Delta_s, 1);
}

}  // namespace

SwitchPoints switch_points(const ScenarioParams& p) {
  return {off_detuning_two_level(p), res_detuning_two_level(p)};
}

ConfinementResult survival_decay(const ScenarioParams& p, ConfinementOptions options) {
  validate(p);
  const auto reference = storage_branch_state(p, p.Delta_s, 1);
  IntegratorSettings settings;
  settings.method = IntegratorSettings::Method::DormandPrince;
  settings.rel_tol = 1e-9;
  settings.abs_tol = 1e-12;
  settings.t_end = options.t_max;
  settings.sample_interval = options.sample_interval;

  auto overlap = [&](std::span<const Complex> psi) {
    Complex c{0.0, 0.0};
    for (std::size_t i = 0; i < psi.size(); ++i) c += std::conj(reference[i]) * psi[i];
    return std::norm(c);
  };
  const double stop_at = options.stop_survival;
  auto stop = [&](double, std::span<const Complex> psi, double, const LossLedger&) {
    return overlap(psi) <= stop_at;
  };
  const auto result = integrate(p, SweepProfile::constant(Knob::DeltaQ, p.Delta_q), reference,
                                DriveField::zero(), settings, stop);
  const auto survival = survival_overlap(result.trajectory, reference);

  ConfinementResult out;
  out.Delta_q = p.Delta_q;
  out.final_time = result.trajectory.times.back();
  out.final_survival = survival.back();
  out.rate = fit_exponential_rate(result.trajectory.times, survival);
  return out;
}

ConfinementResult confinement_run(const ScenarioParams& params, ConfinementOptions options) {
  auto p = params;
  p.Delta_q = off_detuning_two_level(p);
  return survival_decay(p, options);
}

LeakageMap leakage_map(const ScenarioParams& params, const std::vector<double>& Delta_q_grid,
                       const std::vector<double>& delta_q_grid, unsigned workers, double t_max) {
  validate(params);
  LeakageMap map;
  map.Delta_q_grid = Delta_q_grid;
  map.delta_q_grid = delta_q_grid;
  const std::size_t nx = Delta_q_grid.size();
  map.cells.resize(nx * delta_q_grid.size());
  ConfinementOptions options;
  options.t_max = t_max;
  options.sample_interval = 0.02;
  detail::parallel_for(map.cells.size(), workers, [&](std::size_t k) {
    auto p = params;
    p.Delta_q = Delta_q_grid[k % nx];
    p.delta_q = delta_q_grid[k / nx];
    LeakageCell cell{p.Delta_q, p.delta_q, 0.0, false};
    try {
      cell.rate = survival_decay(p, options).rate;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientDecay) throw;
      cell.below_threshold = true;
    }
    map.cells[k] = cell;
  });
  return map;
}

std::vector<PassiveEmission> passive_emission(const ScenarioParams& params,
                                              const std::vector<double>& kappa_wq_list,
                                              double t_end) {
  std::vector<PassiveEmission> out;
  for (double k : kappa_wq_list) {
    auto p = params;
    p.kappa_wq = k;
    validate(p);
    p.Delta_q = res_detuning_two_level(p);
    IntegratorSettings settings;
    settings.t_end = t_end;
    const auto sweep = SweepProfile::constant(Knob::DeltaQ, p.Delta_q);
    auto run = integrate(p, sweep, emission_initial_state(p), DriveField::zero(), settings);
    out.push_back({k, std::move(run.output)});
  }
  return out;
}

ExperimentResult run_emission(const ScenarioParams& params, const SweepProfile& sweep,
                              ShapedEmissionOptions options) {
  if (sweep.knob() != Knob::DeltaQ) {
    throw Error(ErrorCode::InvalidArgument, "emission sweeps drive Delta_q");
  }
  ExperimentResult r;
  r.params = params;
  r.params.Delta_q = sweep(sweep.t_begin());
  validate(r.params);
  r.sweep = sweep;
  const auto points = switch_points(r.params);
  r.Delta_q_off = points.off;
  r.Delta_q_res = points.res;
  r.Delta_q_end = sweep(sweep.t_end());
  r.J = coupling_element_J(r.params, points.res, DressedBranch::Minus);

  IntegratorSettings settings;
  settings.t_start = sweep.t_begin();
  settings.t_end = sweep.t_end() + options.hold_max;
  settings.sample_interval = options.sample_interval;

  // Plateau test: emitted probability gained over the last unit of time.
  const auto lag = static_cast<std::size_t>(std::lround(1.0 / options.sample_interval));
  std::vector<double> history;
  const double sweep_end = sweep.t_end();
  const double increment = options.plateau_increment;
  auto stop = [&](double t, std::span<const Complex>, double emitted, const LossLedger&) {
    history.push_back(emitted);
    if (t < sweep_end + 1.0 || history.size() <= lag) return false;
    return emitted - history[history.size() - 1 - lag] < increment;
  };
  r.run = integrate(r.params, sweep, emission_initial_state(r.params), DriveField::zero(),
                    settings, stop);
  r.metrics = pulse_metrics(r.run.output);

  std::vector<double> times(1001);
  for (std::size_t k = 0; k < times.size(); ++k) {
    times[k] = sweep.t_begin() + (sweep.t_end() - sweep.t_begin()) * static_cast<double>(k) /
                                     static_cast<double>(times.size() - 1);
  }
  try {
    r.adiabaticity = adiabaticity(r.params, sweep, times, emission_reference(r.params));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateGap) throw;
    r.run.warnings.push_back("adiabaticity undefined: " + std::string(e.what()));
  }
  return r;
}

ExperimentResult shaped_emission_linear(const ScenarioParams& params, double T,
                                        ShapedEmissionOptions options) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep duration T must be > 0");
  validate(params);
  const auto points = switch_points(params);
  const double end = points.off + options.endpoint_fraction * (points.res - points.off);
  return run_emission(params, SweepProfile::linear(Knob::DeltaQ, 0.0, T, points.off, end),
                      options);
}

SweepProfile warp_sweep(const SweepProfile& trial_sweep, const OutputRecord& trial_output,
                        double center, double width, int grid_points) {
  if (!(width > 0.0) || grid_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "warp needs a positive width and >= 2 grid points");
  }
  const auto& t = trial_output.times;
  const auto intensity = trial_output.intensity();
  std::vector<double> cumulative(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double step = 0.5 * (t[i] - t[i - 1]) * (intensity[i] + intensity[i - 1]);
    if (step < 0.0) throw Error(ErrorCode::NonMonotoneCumulative, "cumulative emission decreases");
    cumulative[i] = cumulative[i - 1] + step;
  }
  const double total = cumulative.empty() ? 0.0 : cumulative.back();
  if (!(total > 0.0)) throw Error(ErrorCode::NoPulse, "trial run emitted nothing");
  for (auto& c : cumulative) c /= total;

  // Inverse of the trial cumulative; first crossing within flat stretches.
  auto inverse = [&](double f) {
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), f);
    if (it == cumulative.begin()) return t.front();
    if (it == cumulative.end()) return t.back();
    const auto i = static_cast<std::size_t>(it - cumulative.begin());
    const double span = cumulative[i] - cumulative[i - 1];
    const double w = span > 0.0 ? (f - cumulative[i - 1]) / span : 1.0;
    return t[i - 1] + w * (t[i] - t[i - 1]);
  };

  const boost::math::normal_distribution<double> target(center, width);
  const double tau_a = center - 4.0 * width;
  const double tau_b = center + 4.0 * width;
  const double s_a = inverse(boost::math::cdf(target, tau_a));
  const double s_b = inverse(boost::math::cdf(target, tau_b));

  std::vector<SweepProfile::Breakpoint> points;
  auto push = [&](double time, double value) {
    if (points.empty() || time > points.back().t + 1e-12) points.push_back({time, value});
  };
  for (const auto& b : trial_sweep.breakpoints()) {
    if (b.t < s_a) push(b.t, b.value);
  }
  for (int k = 0; k < grid_points; ++k) {
    const double tau = tau_a + (tau_b - tau_a) * k / (grid_points - 1);
    const double s = k == 0 ? s_a : inverse(boost::math::cdf(target, tau));
    push(s_a + (tau - tau_a), trial_sweep(s));
  }
  const double shift = s_a + (tau_b - tau_a) - s_b;
  for (const auto& b : trial_sweep.breakpoints()) {
    if (b.t > s_b) push(b.t + shift, b.value);
  }
  if (points.size() < 2) points.push_back({points.back().t + 1.0, points.back().value});
  return SweepProfile(trial_sweep.knob(), std::move(points));
}

SweepProfile rate_map_sweep(const ExperimentResult& run, double center, double width,
                            int grid_points) {
  if (!(width > 0.0) || grid_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "rate map needs a positive width and >= 2 grid points");
  }
  const auto& traj = run.run.trajectory;
  const auto intensity = run.run.output.intensity();
  // Emission rate against knob value, kept where the rate reaches a new high.
  std::vector<double> rate, knob;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    if (t > run.sweep.t_end()) break;
    const double remaining = traj.norm2(k);
    if (remaining < 1e-6) break;
    const double g = intensity[k] / remaining;
    if (rate.empty() || g > rate.back()) {
      rate.push_back(g);
      knob.push_back(run.sweep(t));
    }
  }
  if (rate.size() < 2) {
    throw Error(ErrorCode::NoPulse, "run shows no growing emission rate to map");
  }

  const boost::math::normal_distribution<double> target(center, width);
  const double tau_a = center - 4.0 * width;
  const double tau_b = center + 4.0 * width;
  std::vector<SweepProfile::Breakpoint> points;
  for (int k = 0; k < grid_points; ++k) {
    const double tau = tau_a + (tau_b - tau_a) * k / (grid_points - 1);
    const double hazard = boost::math::pdf(target, tau) /
                          std::max(boost::math::cdf(boost::math::complement(target, tau)), 1e-300);
    double value;
    if (hazard >= rate.back()) {
      value = knob.back();
    } else if (hazard <= rate.front()) {
      value = knob.front();
    } else {
      const auto i = static_cast<std::size_t>(
          std::lower_bound(rate.begin(), rate.end(), hazard) - rate.begin());
      const double w = (hazard - rate[i - 1]) / (rate[i] - rate[i - 1]);
      value = knob[i - 1] + w * (knob[i] - knob[i - 1]);
    }
    points.push_back({tau, value});
  }

  // Trim the flat head (still confined) and tail (already at the last knob value).
  std::size_t first = 0;
  while (first + 1 < points.size() && points[first + 1].value == knob.front()) ++first;
  std::size_t last = first + 1;
  while (last < points.size() && points[last - 1].value != knob.back()) ++last;
  last = std::min(std::max(last, first + 2), points.size());
  std::vector<SweepProfile::Breakpoint> trimmed(points.begin() + static_cast<long>(first),
                                                points.begin() + static_cast<long>(last));
  const double t0 = trimmed.front().t;
  for (auto& b : trimmed) b.t -= t0;
  return SweepProfile(run.sweep.knob(), std::move(trimmed));
}

Reconstruction reconstruct_sweep(const ExperimentResult& trial, ReconstructionOptions options,
                                 ShapedEmissionOptions emission) {
  if (trial.metrics.P_out <= 0.9) {
    throw Error(ErrorCode::InvalidArgument, "trial run must emit with P_out > 0.9");
  }
  Reconstruction out;
  out.target_width = options.target_width > 0.0
                         ? options.target_width
                         : options.width_factor * trial.metrics.gaussian.sigma;
  out.best = trial;
  out.xi_history.push_back(trial.metrics.xi);
  const double trial_duration = trial.sweep.t_end() - trial.sweep.t_begin();

  for (int k = 0; k < options.iterations; ++k) {
    ++out.iterations_run;
    const auto& current = out.best;
    const double center = current.metrics.gaussian.center;
    std::optional<ExperimentResult> chosen;
    ReshapeMethod chosen_method = ReshapeMethod::TimeWarp;
    for (auto method : {ReshapeMethod::TimeWarp, ReshapeMethod::RateMap}) {
      const auto sweep =
          method == ReshapeMethod::TimeWarp
              ? warp_sweep(current.sweep, current.run.output, center, out.target_width,
                           options.grid_points)
              : rate_map_sweep(current, center, out.target_width, options.grid_points);
      auto candidate = run_emission(trial.params, sweep, emission);
      if (candidate.metrics.P_out < trial.metrics.P_out - 0.005) continue;
      if (sweep.t_end() - sweep.t_begin() > 2.0 * trial_duration) continue;
      if (!chosen || candidate.metrics.xi < chosen->metrics.xi) {
        chosen = std::move(candidate);
        chosen_method = method;
      }
    }
    if (!chosen || chosen->metrics.xi > out.best.metrics.xi - options.min_improvement) break;
    out.best = std::move(*chosen);
    out.steps.push_back(chosen_method);
    out.xi_history.push_back(out.best.metrics.xi);
    out.improved = true;
  }
  return out;
}

std::vector<DissipationPoint> dissipation_scan_switching(const ScenarioParams& params,
                                                         DissipationChannel channel,
                                                         const std::vector<double>& rates,
                                                         double T, ShapedEmissionOptions options,
                                                         unsigned workers) {
  std::vector<DissipationPoint> out(rates.size());
  detail::parallel_for(rates.size(), workers, [&](std::size_t k) {
    auto p = params;
    p.kappa_s = p.gamma_s = p.kappa_q = p.gamma_q = 0.0;
    (channel == DissipationChannel::KappaQ ? p.kappa_q : p.gamma_q) = rates[k];
    const auto r = shaped_emission_linear(p, T, options);
    const auto& traj = r.run.trajectory;
    out[k] = {rates[k], r.metrics.P_out, traj.dissipated.back().total()};
  });
  return out;
}

QuditResult qudit_emission(const ScenarioParams& params, const std::vector<Complex>& coefficients,
                           QuditTiming timing, double segment_threshold) {
  validate(params);
  if (params.levels_s < 3) {
    throw Error(ErrorCode::InvalidArgument, "qudit emission needs levels_s >= 3");
  }
  const int branches = params.levels_s - 1;
  if (static_cast<int>(coefficients.size()) != branches) {
    throw Error(ErrorCode::LengthMismatch, "need levels_s - 1 coefficients");
  }
  if (std::abs(norm2(coefficients) - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "coefficients must be unit-norm");
  }
  for (double d : {timing.hold_off, timing.leg, timing.hold_end, timing.transit}) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "timing durations must be > 0");
  }

  QuditResult r;
  r.params = params;
  for (int i = 1; i <= branches; ++i) {
    try {
      r.points.push_back(resonance_and_off_points_multilevel(params, i, timing.switch_branch));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoBracket) throw;
      throw Error(ErrorCode::UnresolvedResonance,
                  "storage branch " + std::to_string(i) + ": " + e.what());
    }
  }

  // Breakpoints, and the window boundaries between consecutive branches
  // (the start of each transit).
  std::vector<SweepProfile::Breakpoint> bp;
  std::vector<double> boundaries{0.0};
  double t = 0.0;
  for (int i = branches; i >= 1; --i) {
    const auto& pt = r.points[static_cast<std::size_t>(i - 1)];
    if (i != branches) t += timing.transit;
    bp.push_back({t, pt.off});
    t += timing.hold_off;
    bp.push_back({t, pt.off});
    t += timing.leg;
    const double end = pt.off + timing.overshoot * (pt.resonance - pt.off);
    bp.push_back({t, end});
    t += timing.hold_end;
    bp.push_back({t, end});
    boundaries.push_back(t);
  }
  r.sweep = SweepProfile(Knob::DeltaS, std::move(bp));

  const double start = r.points.back().off;
  r.params.Delta_s = start;
  std::vector<ComplexVector> states;
  for (int i = 1; i <= branches; ++i) states.push_back(storage_branch_state(r.params, start, i));
  const auto initial = superpose(coefficients, states);

  IntegratorSettings settings;
  settings.t_end = r.sweep.t_end();
  r.run = integrate(r.params, r.sweep, initial, DriveField::zero(), settings);

  const auto& traj = r.run.trajectory;
  const auto first_leg = static_cast<std::size_t>(
      std::upper_bound(traj.times.begin(), traj.times.end(), timing.hold_off) -
      traj.times.begin());
  r.premature_loss = traj.emitted[first_leg - 1] + traj.dissipated[first_leg - 1].total();
  r.remaining = traj.norm2(traj.size() - 1);
  r.P_out = emitted_probability(r.run.output);

  // Pulses are resolved when |f_out|^2 is below threshold at every window
  // boundary and each populated window rises above it.
  const auto intensity_all = r.run.output.intensity();
  const double peak = *std::max_element(intensity_all.begin(), intensity_all.end());
  const double threshold = segment_threshold * peak;
  auto sample_at = [&](double time) {
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), time);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - traj.times.begin(), static_cast<std::ptrdiff_t>(traj.size()) - 1));
  };
  for (std::size_t k = 1; k + 1 < boundaries.size(); ++k) {
    if (intensity_all[sample_at(boundaries[k])] >= threshold) {
      throw Error(ErrorCode::PulseOverlap,
                  "output still above threshold at the end of emission window " +
                      std::to_string(k) + "; lengthen hold_end");
    }
  }
  for (int k = 0; k < branches; ++k) {
    const int branch = branches - k;
    const bool populated = std::norm(coefficients[static_cast<std::size_t>(branch - 1)]) > 1e-6;
    if (!populated) continue;
    const auto part = slice(r.run.output, boundaries[static_cast<std::size_t>(k)],
                            boundaries[static_cast<std::size_t>(k) + 1]);
    const auto intensity = part.intensity();
    if (*std::max_element(intensity.begin(), intensity.end()) < threshold) {
      throw Error(ErrorCode::PulseOverlap,
                  "no pulse in emission window " + std::to_string(k + 1));
    }
    std::vector<double> weighted(part.size());
    for (std::size_t i = 0; i < part.size(); ++i) weighted[i] = part.times[i] * intensity[i];
    const double area = trapezoid(part.times, intensity);
    PulseSegment seg{part.times.front(), part.times.back(), area,
                     area > 0.0 ? trapezoid(part.times, weighted) / area : part.times.front()};
    r.pulses.push_back(seg);
    r.pulse_branch.push_back(branch);
    r.pulse_xi.push_back(pulse_mode_mismatch(r.run.output, seg));
  }
  return r;
}

CaptureResult capture_run(const ScenarioParams& params, const SweepProfile& sweep,
                          const DriveField& drive, double sample_interval) {
  validate(params);
  IntegratorSettings settings;
  settings.t_start = sweep.t_begin();
  settings.t_end = sweep.t_end();
  settings.sample_interval = sample_interval;
  const ComplexVector ground(manifold_dimension(params), Complex{0.0, 0.0});

  CaptureResult r;
  r.run = integrate(params, sweep, ground, drive, settings);
  const auto& traj = r.run.trajectory;
  r.captured = traj.norm2(traj.size() - 1);
  std::vector<double> incident(r.run.output.size());
  for (std::size_t i = 0; i < incident.size(); ++i) incident[i] = std::norm(r.run.output.f_in[i]);
  r.incident = trapezoid(r.run.output.times, incident);
  r.reflected = emitted_probability(r.run.output);
  return r;
}

CaptureResult capture_mirrored(const ExperimentResult& emission) {
  const auto& out = emission.run.output;
  const double t0 = out.times.front();
  const double t1 = out.times.back();

  auto points = emission.sweep.breakpoints();
  if (t1 > points.back().t) points.push_back({t1, points.back().value});
  const auto sweep = SweepProfile(emission.sweep.knob(), std::move(points)).reversed();

  std::vector<double> times(out.size());
  ComplexVector values(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t j = out.size() - 1 - i;
    times[i] = t0 + t1 - out.times[j];
    values[i] = -std::conj(out.f_out[j]);
  }
  return capture_run(emission.params, sweep, DriveField::tabulated(times, values));
}

}  // namespace qswitch
