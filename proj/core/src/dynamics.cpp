#include "qswitch/dynamics.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "qswitch/error.hpp"
#include "qswitch/spectra.hpp"

namespace qswitch {

namespace odeint = boost::numeric::odeint;

void validate(const IntegratorSettings& s) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidIntegrator, msg); };
  if (!std::isfinite(s.t_start) || !std::isfinite(s.t_end) || !(s.t_end > s.t_start)) {
    fail("t_end must exceed t_start");
  }
  if (!(s.sample_interval > 0.0)) fail("sample_interval must be > 0");
  if (s.method == IntegratorSettings::Method::DormandPrince) {
    if (!(s.rel_tol > 0.0) || !(s.abs_tol > 0.0)) fail("tolerances must be > 0");
    if (!(s.dt_min > 0.0) || !(s.dt_max >= s.dt_min)) fail("need 0 < dt_min <= dt_max");
  } else if (!std::isfinite(s.dt) || s.dt < 0.0) {
    fail("dt must be > 0 (or 0 for the default rule)");
  }
}

double default_time_step(const ScenarioParams& p, const SweepProfile& sweep) {
  double scale = std::max({p.g_s, p.g_q, p.kappa_sq, p.kappa_wq, p.kappa_s, p.kappa_q,
                           p.gamma_s, p.gamma_q, std::abs(p.delta_q), std::abs(p.Delta_s),
                           std::abs(p.Delta_q)});
  for (double w : p.Omega_s) scale = std::max(scale, w);
  for (double d : p.delta_s_i) scale = std::max(scale, std::abs(d));
  for (const auto& b : sweep.breakpoints()) scale = std::max(scale, std::abs(b.value));
  return std::min(1e-3, 0.05 / scale);
}

DriveField DriveField::gaussian(Complex amplitude, double center, double width,
                                double carrier_detuning) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "drive width must be > 0");
  DriveField f;
  f.shape_ = Gaussian{amplitude, center, width, carrier_detuning};
  return f;
}

DriveField DriveField::tabulated(std::vector<double> times, ComplexVector values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "tabulated drive needs >= 2 matching samples");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "tabulated drive times must increase strictly");
    }
  }
  DriveField f;
  f.shape_ = Tabulated{std::move(times), std::move(values)};
  return f;
}

Complex DriveField::operator()(double t) const {
  if (const auto* g = std::get_if<Gaussian>(&shape_)) {
    const double x = t - g->center;
    return g->amplitude * std::exp(-x * x / (4.0 * g->width * g->width)) *
           std::polar(1.0, -g->carrier_detuning * x);
  }
  if (const auto* tab = std::get_if<Tabulated>(&shape_)) {
    const auto& ts = tab->times;
    if (t < ts.front() || t > ts.back()) return {0.0, 0.0};
    auto hi = std::upper_bound(ts.begin(), ts.end(), t);
    if (hi == ts.end()) return tab->values.back();
    const auto i = static_cast<std::size_t>(hi - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return tab->values[i - 1] + w * (tab->values[i] - tab->values[i - 1]);
  }
  return {0.0, 0.0};
}

namespace {

constexpr Complex kI{0.0, 1.0};

// Writes d(amplitudes)/dt into out. `Delta_s`/`Delta_q` are the instantaneous
// detunings.
void amplitude_rhs(const ScenarioParams& p, double Delta_s, double Delta_q, Complex f_in,
                   std::span<const Complex> a, std::span<Complex> out) {
  const int n = p.levels_s;
  const std::size_t ps = photon_s_index();
  const std::size_t pq = photon_q_index(p);
  const std::size_t aq = atom_q_index(p);

  out[ps] = -0.5 * p.kappa_s * a[ps] - kI * p.kappa_sq * a[pq] - kI * p.g_s * a[atom_s_index(1)];
  for (int rung = 1; rung < n; ++rung) {
    const auto r = atom_s_index(rung);
    const double shift = rung == 1 ? 0.0 : p.delta_s_i[static_cast<std::size_t>(rung - 2)];
    Complex v = (-kI * (Delta_s + shift) - 0.5 * p.gamma_s) * a[r];
    if (rung == 1) {
      v -= kI * p.g_s * a[ps];
    } else {
      v -= kI * p.Omega_s[static_cast<std::size_t>(rung - 2)] * a[r - 1];
    }
    if (rung + 1 < n) v -= kI * p.Omega_s[static_cast<std::size_t>(rung - 1)] * a[r + 1];
    out[r] = v;
  }
  out[pq] = (-kI * p.delta_q - 0.5 * (p.kappa_q + p.kappa_wq)) * a[pq] - kI * p.kappa_sq * a[ps] -
            kI * p.g_q * a[aq] - std::sqrt(p.kappa_wq) * f_in;
  out[aq] = (-kI * Delta_q - 0.5 * p.gamma_q) * a[aq] - kI * p.g_q * a[pq];
}

struct Detunings {
  double Delta_s;
  double Delta_q;
};

Detunings detunings_at(const ScenarioParams& p, const SweepProfile& sweep, double t) {
  return sweep.knob() == Knob::DeltaS ? Detunings{sweep(t), p.Delta_q}
                                      : Detunings{p.Delta_s, sweep(t)};
}

using State = std::vector<double>;

// Real state layout: [Re a_0, Im a_0, ..., Re a_{d-1}, Im a_{d-1},
//                     emitted, lost_kappa_s, lost_kappa_q, lost_gamma_s, lost_gamma_q]
constexpr std::size_t kLedgerSlots = 5;

struct System {
  const ScenarioParams& p;
  const SweepProfile& sweep;
  const DriveField& drive;
  std::size_t d;
  mutable ComplexVector a;
  mutable ComplexVector da;

  void operator()(const State& x, State& dxdt, double t) const {
    for (std::size_t k = 0; k < d; ++k) a[k] = {x[2 * k], x[2 * k + 1]};
    const auto [Ds, Dq] = detunings_at(p, sweep, t);
    const Complex f_in = drive(t);
    amplitude_rhs(p, Ds, Dq, f_in, a, da);
    for (std::size_t k = 0; k < d; ++k) {
      dxdt[2 * k] = da[k].real();
      dxdt[2 * k + 1] = da[k].imag();
    }
    const std::size_t pq = photon_q_index(p);
    const Complex f_out = f_in + std::sqrt(p.kappa_wq) * a[pq];
    double atom_s = 0.0;
    for (int rung = 1; rung < p.levels_s; ++rung) atom_s += std::norm(a[atom_s_index(rung)]);
    const std::size_t base = 2 * d;
    dxdt[base + 0] = std::norm(f_out);
    dxdt[base + 1] = p.kappa_s * std::norm(a[photon_s_index()]);
    dxdt[base + 2] = p.kappa_q * std::norm(a[pq]);
    dxdt[base + 3] = p.gamma_s * atom_s;
    dxdt[base + 4] = p.gamma_q * std::norm(a[atom_q_index(p)]);
  }
};

class Recorder {
 public:
  Recorder(const ScenarioParams& p, const DriveField& drive, std::size_t d, std::size_t reserve)
      : p_(p), drive_(drive), d_(d) {
    result_.trajectory.times.reserve(reserve);
    result_.trajectory.amplitudes.reserve(reserve);
    result_.trajectory.emitted.reserve(reserve);
    result_.trajectory.dissipated.reserve(reserve);
    result_.output.times.reserve(reserve);
    result_.output.f_in.reserve(reserve);
    result_.output.f_out.reserve(reserve);
  }

  // Returns true if the stop predicate fired.
  bool record(double t, const State& x, const StopPredicate& stop) {
    ComplexVector amps(d_);
    for (std::size_t k = 0; k < d_; ++k) {
      amps[k] = {x[2 * k], x[2 * k + 1]};
      if (!std::isfinite(x[2 * k]) || !std::isfinite(x[2 * k + 1])) {
        throw Error(ErrorCode::NonFiniteState, "non-finite amplitude at t = " + std::to_string(t));
      }
    }
    const std::size_t base = 2 * d_;
    const LossLedger lost{x[base + 1], x[base + 2], x[base + 3], x[base + 4]};
    const Complex f_in = drive_(t);
    auto& tr = result_.trajectory;
    tr.times.push_back(t);
    tr.emitted.push_back(x[base]);
    tr.dissipated.push_back(lost);
    result_.output.times.push_back(t);
    result_.output.f_in.push_back(f_in);
    result_.output.f_out.push_back(f_in + std::sqrt(p_.kappa_wq) * amps[photon_q_index(p_)]);
    tr.amplitudes.push_back(std::move(amps));
    return stop && stop(t, tr.amplitudes.back(), x[base], lost);
  }

  IntegrationResult take() { return std::move(result_); }
  IntegrationResult& result() { return result_; }

 private:
  const ScenarioParams& p_;
  const DriveField& drive_;
  std::size_t d_;
  IntegrationResult result_;
};

}  // namespace

ComplexVector derivative(double t, std::span<const Complex> amplitudes, const ScenarioParams& p,
                         const SweepProfile& sweep, const DriveField& drive) {
  validate(p);
  if (amplitudes.size() != manifold_dimension(p)) {
    throw Error(ErrorCode::InvalidArgument, "amplitude vector has the wrong dimension");
  }
  ComplexVector out(amplitudes.size());
  const auto [Ds, Dq] = detunings_at(p, sweep, t);
  amplitude_rhs(p, Ds, Dq, drive(t), amplitudes, out);
  return out;
}

IntegrationResult integrate(const ScenarioParams& p, const SweepProfile& sweep,
                            std::span<const Complex> initial, const DriveField& drive,
                            const IntegratorSettings& s, const StopPredicate& stop) {
  validate(p);
  validate(s);
  const std::size_t d = manifold_dimension(p);
  if (initial.size() != d) {
    throw Error(ErrorCode::InvalidArgument, "initial state has dimension " +
                                                std::to_string(initial.size()) + ", expected " +
                                                std::to_string(d));
  }

  State x(2 * d + kLedgerSlots, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    x[2 * k] = initial[k].real();
    x[2 * k + 1] = initial[k].imag();
  }

  const auto samples = static_cast<std::size_t>(
      std::ceil((s.t_end - s.t_start) / s.sample_interval - 1e-9));
  Recorder recorder(p, drive, d, samples + 1);
  if (drive.is_zero()) {
    const double n0 = norm2(ComplexVector(initial.begin(), initial.end()));
    if (std::abs(n0 - 1.0) > 1e-9) {
      recorder.result().warnings.push_back("initial state is not normalized (norm^2 = " +
                                           std::to_string(n0) + ")");
    }
  }

  System system{p, sweep, drive, d, ComplexVector(d), ComplexVector(d)};
  if (recorder.record(s.t_start, x, stop)) return recorder.take();

  if (s.method == IntegratorSettings::Method::RK4) {
    const double requested = s.dt > 0.0 ? s.dt : default_time_step(p, sweep);
    const auto substeps =
        static_cast<std::size_t>(std::max(1.0, std::ceil(s.sample_interval / requested - 1e-9)));
    const double dt = s.sample_interval / static_cast<double>(substeps);
    odeint::runge_kutta4<State> stepper;
    for (std::size_t k = 1; k <= samples; ++k) {
      for (std::size_t j = 0; j < substeps; ++j) {
        const double t = s.t_start + s.sample_interval * static_cast<double>(k - 1) +
                         dt * static_cast<double>(j);
        stepper.do_step(system, x, t, dt);
      }
      if (recorder.record(s.t_start + s.sample_interval * static_cast<double>(k), x, stop)) break;
    }
    return recorder.take();
  }

  auto stepper = odeint::make_controlled(s.abs_tol, s.rel_tol, odeint::runge_kutta_dopri5<State>());
  double t = s.t_start;
  double dt = std::min(s.dt_max, s.sample_interval);
  for (std::size_t k = 1; k <= samples; ++k) {
    const double target = s.t_start + s.sample_interval * static_cast<double>(k);
    while (t < target) {
      double h = std::min({dt, s.dt_max, target - t});
      const bool final_step = h >= target - t;
      const double t_before = t;
      const auto outcome = stepper.try_step(system, x, t, h);
      if (outcome == odeint::success) {
        if (final_step) t = target;  // land exactly on the sample grid
        dt = std::max(h, s.dt_min);
      } else {
        if (h < s.dt_min) {
          throw Error(ErrorCode::StepUnderflow,
                      "adaptive step fell below dt_min at t = " + std::to_string(t_before));
        }
        dt = h;
      }
    }
    if (recorder.record(target, x, stop)) break;
  }
  return recorder.take();
}

std::vector<double> survival_overlap(const AmplitudeTrajectory& trajectory,
                                     std::span<const Complex> reference) {
  std::vector<double> out;
  out.reserve(trajectory.size());
  for (const auto& amps : trajectory.amplitudes) {
    Complex overlap{0.0, 0.0};
    for (std::size_t k = 0; k < amps.size(); ++k) overlap += std::conj(reference[k]) * amps[k];
    out.push_back(std::norm(overlap));
  }
  return out;
}

ComplexVector to_complex(std::span<const double> v) {
  return ComplexVector(v.begin(), v.end());
}

ComplexVector photon_s_state(const ScenarioParams& p) {
  ComplexVector v(manifold_dimension(p));
  v[photon_s_index()] = 1.0;
  return v;
}

ComplexVector storage_branch_state(const ScenarioParams& p, double Delta_s, int branch) {
  return to_complex(storage_state(p, Delta_s, branch));
}

ComplexVector superpose(std::span<const Complex> coefficients,
                        std::span<const ComplexVector> states) {
  if (coefficients.size() != states.size() || states.empty()) {
    throw Error(ErrorCode::InvalidArgument, "superpose needs one coefficient per state");
  }
  ComplexVector out(states.front().size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += coefficients[i] * states[i][k];
  }
  return out;
}

}  // namespace qswitch
