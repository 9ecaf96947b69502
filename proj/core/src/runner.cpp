#include "qswitch/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

#include "json.hpp"

#include "qswitch/error.hpp"
#include "parallel.hpp"

namespace qswitch {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int exit_code(const Error& e) { return is_validation_error(e.code()) ? 2 : 3; }

namespace {

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) throw Error(ErrorCode::NonFiniteState, "non-finite CSV value");
      out_ << (i ? "," : "") << format_number(values[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void check_finite(const json& j, const std::string& where) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw Error(ErrorCode::NonFiniteState, "non-finite value at " + where);
  }
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) check_finite(v, where + "." + k);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], where + "[" + std::to_string(i) + "]");
  }
}

void write_json(const fs::path& path, const json& j) {
  check_finite(j, "$");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

struct Context {
  const RunConfig& config;
  const RunOptions& options;
  RunOutcome& outcome;

  fs::path file(const std::string& suffix) {
    auto p = options.out_dir / (config.name + suffix);
    outcome.files.push_back(p);
    return p;
  }
  void log(const std::string& msg) const {
    if (options.verbose) std::clog << "[" << config.name << "] " << msg << '\n';
  }
  void warn(const std::string& msg) {
    outcome.warnings.push_back(msg);
    log("warning: " + msg);
  }
  void absorb(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) warn(w);
  }
};

ShapedEmissionOptions emission_options(const RunConfig& c) {
  ShapedEmissionOptions o;
  o.endpoint_fraction = c.sweep_endpoint_fraction;
  o.hold_max = c.hold_max;
  o.sample_interval = c.integrator.sample_interval;
  return o;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
  return x;
}

void write_output_record(Context& ctx, const std::string& suffix, const OutputRecord& r,
                         const GaussianFit* fit) {
  std::vector<std::string> header{"t", "re_f_in", "im_f_in", "re_f_out", "im_f_out", "intensity"};
  if (fit) header.push_back("gaussian");
  Csv csv(ctx.file(suffix), header);
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::vector<double> row{r.times[i],        r.f_in[i].real(),  r.f_in[i].imag(),
                            r.f_out[i].real(), r.f_out[i].imag(), std::norm(r.f_out[i])};
    if (fit) row.push_back(fit->intensity(r.times[i]));
    csv.row(row);
  }
}

void write_sweep(Context& ctx, const std::string& suffix, const SweepProfile& s) {
  Csv csv(ctx.file(suffix), {"t", to_string(s.knob())});
  for (const auto& b : s.breakpoints()) csv.row({b.t, b.value});
}

json ledger_json(const IntegrationResult& run) {
  const auto& tr = run.trajectory;
  const std::size_t last = tr.size() - 1;
  const auto& d = tr.dissipated[last];
  return {{"norm2", tr.norm2(last)},
          {"emitted", tr.emitted[last]},
          {"dissipated",
           {{"kappa_s", d.kappa_s},
            {"kappa_q", d.kappa_q},
            {"gamma_s", d.gamma_s},
            {"gamma_q", d.gamma_q},
            {"total", d.total()}}}};
}

json gaussian_json(const GaussianFit& g) {
  return {{"area", g.area}, {"t0", g.center}, {"sigma", g.sigma}, {"residual", g.residual}};
}

json emission_json(const ExperimentResult& r) {
  json j{{"P_out", r.metrics.P_out},
         {"xi", r.metrics.xi},
         {"gaussian", gaussian_json(r.metrics.gaussian)},
         {"J", r.J},
         {"Delta_q_off", r.Delta_q_off},
         {"Delta_q_res", r.Delta_q_res},
         {"Delta_q_end", r.Delta_q_end},
         {"sweep_duration", r.sweep.t_end() - r.sweep.t_begin()},
         {"t_end", r.run.output.times.back()},
         {"ledger", ledger_json(r.run)}};
  if (r.adiabaticity) {
    j["A"] = r.adiabaticity->value;
    j["A_time"] = r.adiabaticity->time;
  } else {
    j["A"] = nullptr;
  }
  return j;
}

// ---- spectrum --------------------------------------------------------------

void run_spectrum(Context& ctx) {
  const auto& c = ctx.config;
  const auto& p = c.scenario;
  const auto grid = linspace(c.spectrum_min, c.spectrum_max, c.spectrum_points);
  const auto table = track_branches(p, c.spectrum_knob, grid);
  const std::size_t d = table.dimension();
  const auto storage = storage_state(p, p.Delta_s, 1);
  const std::size_t iq = photon_q_index(p);
  const std::size_t ia = atom_q_index(p);

  std::vector<std::string> header{to_string(c.spectrum_knob)};
  for (std::size_t b = 1; b <= d; ++b) header.push_back("E_" + std::to_string(b));
  for (std::size_t b = 1; b <= d; ++b) {
    const auto n = std::to_string(b);
    header.push_back("photon_q_" + n);
    header.push_back("atom_q_" + n);
    header.push_back("storage_" + n);
  }
  // Isolated-site energies: storage branches, then the switch pair.
  const auto n_storage = static_cast<std::size_t>(p.levels_s);
  for (std::size_t b = 1; b <= n_storage; ++b) header.push_back("site_s_" + std::to_string(b));
  header.emplace_back("site_q_minus");
  header.emplace_back("site_q_plus");
  Csv csv(ctx.file(".csv"), header);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> row{grid[k]};
    for (std::size_t b = 0; b < d; ++b) row.push_back(table.branches[b][k].energy);
    for (std::size_t b = 0; b < d; ++b) {
      const auto& v = table.branches[b][k].vector;
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * storage[i];
      row.push_back(v[iq] * v[iq]);
      row.push_back(v[ia] * v[ia]);
      row.push_back(s * s);
    }
    const bool on_s = c.spectrum_knob == Knob::DeltaS;
    for (double e : storage_energies(p, on_s ? grid[k] : p.Delta_s)) row.push_back(e);
    const double dq = on_s ? p.Delta_q : grid[k];
    row.push_back(switch_dressed_state(p, dq, DressedBranch::Minus).energy);
    row.push_back(switch_dressed_state(p, dq, DressedBranch::Plus).energy);
    csv.row(row);
  }
  ctx.log("tracked " + std::to_string(d) + " branches on " + std::to_string(grid.size()) +
          " points");
}

// ---- evolve ----------------------------------------------------------------

ComplexVector initial_state(const RunConfig& c) {
  const auto& p = c.scenario;
  switch (c.initial) {
    case InitialState::StorageBranch:
      return storage_branch_state(p, p.Delta_s, c.initial_branch);
    case InitialState::PhotonS:
      return photon_s_state(p);
    case InitialState::Ground:
      break;
  }
  return ComplexVector(manifold_dimension(p));
}

SweepProfile evolve_sweep(const RunConfig& c) {
  const auto& p = c.scenario;
  const double held = c.sweep_knob == Knob::DeltaQ ? p.Delta_q : p.Delta_s;
  if (c.sweep_times.empty() && c.sweep_values.empty()) return SweepProfile::constant(c.sweep_knob, held);
  if (c.sweep_times.size() != c.sweep_values.size()) {
    throw Error(ErrorCode::LengthMismatch, "sweep_times and sweep_values differ in length");
  }
  std::vector<SweepProfile::Breakpoint> points;
  for (std::size_t i = 0; i < c.sweep_times.size(); ++i) {
    points.push_back({c.sweep_times[i], c.sweep_values[i]});
  }
  return SweepProfile(c.sweep_knob, std::move(points));
}

void run_evolve(Context& ctx) {
  const auto& c = ctx.config;
  const auto& p = c.scenario;
  const auto sweep = evolve_sweep(c);
  const auto psi0 = initial_state(c);
  const auto res = integrate(p, sweep, psi0, DriveField::zero(), c.integrator);
  ctx.absorb(res.warnings);

  std::vector<std::string> header{"t"};
  for (const auto& label : basis(p)) {
    header.push_back("re_" + to_string(label));
    header.push_back("im_" + to_string(label));
  }
  for (const char* h : {"intensity", "emitted", "dissipated_kappa_s", "dissipated_kappa_q",
                        "dissipated_gamma_s", "dissipated_gamma_q", "dissipated"}) {
    header.emplace_back(h);
  }
  const auto& tr = res.trajectory;
  Csv csv(ctx.file(".csv"), header);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    for (const auto& a : tr.amplitudes[k]) {
      row.push_back(a.real());
      row.push_back(a.imag());
    }
    const auto& d = tr.dissipated[k];
    row.insert(row.end(), {std::norm(res.output.f_out[k]), tr.emitted[k], d.kappa_s, d.kappa_q,
                           d.gamma_s, d.gamma_q, d.total()});
    csv.row(row);
  }
  const std::size_t last = tr.size() - 1;
  ctx.log("ledger total at end: " + format_number(tr.ledger_total(last)));
}

// ---- shape -----------------------------------------------------------------

void run_shape(Context& ctx) {
  const auto& c = ctx.config;
  const auto opts = emission_options(c);
  auto trial = shaped_emission_linear(c.scenario, c.sweep_T, opts);
  ctx.absorb(trial.run.warnings);
  ctx.log("trial xi " + format_number(trial.metrics.xi));

  json j = emission_json(trial);
  j["T"] = c.sweep_T;
  const ExperimentResult* final_run = &trial;
  Reconstruction rec;
  if (c.reconstruct) {
    rec = reconstruct_sweep(trial, c.reconstruction, opts);
    final_run = &rec.best;
    json r = emission_json(rec.best);
    r["xi_history"] = rec.xi_history;
    r["improved"] = rec.improved;
    r["iterations_run"] = rec.iterations_run;
    r["target_width"] = rec.target_width;
    std::vector<std::string> steps;
    for (auto s : rec.steps) steps.emplace_back(s == ReshapeMethod::TimeWarp ? "time_warp" : "rate_map");
    r["steps"] = steps;
    j["reconstructed"] = r;
    ctx.log("reconstructed xi " + format_number(rec.best.metrics.xi));
  }
  write_json(ctx.file(".json"), j);
  write_sweep(ctx, "_sweep.csv", trial.sweep);
  write_output_record(ctx, "_output.csv", trial.run.output, &trial.metrics.gaussian);
  if (c.reconstruct) {
    write_sweep(ctx, "_reconstructed_sweep.csv", final_run->sweep);
    write_output_record(ctx, "_reconstructed_output.csv", final_run->run.output,
                        &final_run->metrics.gaussian);
  }
}

// ---- qudit -----------------------------------------------------------------

void run_qudit(Context& ctx) {
  const auto& c = ctx.config;
  // Config coefficients are relative weights; normalized here.
  double n2 = 0.0;
  for (double x : c.qudit_coefficients) n2 += x * x;
  if (!(n2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "qudit_coefficients are all zero");
  std::vector<Complex> coeffs;
  for (double x : c.qudit_coefficients) coeffs.emplace_back(x / std::sqrt(n2));
  const auto r = qudit_emission(c.scenario, coeffs, c.qudit, c.qudit_threshold);
  ctx.absorb(r.run.warnings);

  json pulses = json::array();
  for (std::size_t i = 0; i < r.pulses.size(); ++i) {
    const auto& s = r.pulses[i];
    pulses.push_back({{"branch", r.pulse_branch[i]},
                      {"area", s.area},
                      {"center", s.center},
                      {"t_start", s.t_start},
                      {"t_end", s.t_end},
                      {"xi", r.pulse_xi[i]}});
  }
  json points = json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    points.push_back({{"branch", static_cast<int>(i) + 1},
                      {"off", r.points[i].off},
                      {"resonance", r.points[i].resonance}});
  }
  json j{{"P_out", r.P_out},
         {"premature_loss", r.premature_loss},
         {"remaining", r.remaining},
         {"pulses", pulses},
         {"points", points},
         {"ledger", ledger_json(r.run)}};
  write_json(ctx.file(".json"), j);
  write_sweep(ctx, "_sweep.csv", r.sweep);
  write_output_record(ctx, "_output.csv", r.run.output, nullptr);
}

// ---- scan ------------------------------------------------------------------

double& channel_rate(ScenarioParams& p, const std::string& channel) {
  if (channel == "kappa_s") return p.kappa_s;
  if (channel == "gamma_s") return p.gamma_s;
  if (channel == "kappa_q") return p.kappa_q;
  if (channel == "gamma_q") return p.gamma_q;
  throw Error(ErrorCode::InvalidArgument, "unknown channel " + channel);
}

void require_values(const std::vector<double>& v, const char* key) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, std::string(key) + " is empty");
}

void run_scan(Context& ctx) {
  const auto& c = ctx.config;
  const auto& p = c.scenario;
  const unsigned workers = ctx.options.workers;

  switch (c.scan_kind) {
    case ScanKind::Confinement: {
      require_values(c.scan_values, "scan_values");
      struct Row {
        ConfinementResult r;
        bool below;
      };
      std::vector<Row> rows(c.scan_values.size());
      ConfinementOptions opts;
      opts.t_max = c.scan_t_max;
      detail::parallel_for(rows.size(), workers, [&](std::size_t k) {
        auto q = p;
        channel_rate(q, c.scan_channel) = c.scan_values[k];
        try {
          rows[k] = {confinement_run(q, opts), false};
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InsufficientDecay) throw;
          rows[k] = {{0.0, switch_points(q).off, opts.t_max, 1.0}, true};
        }
      });
      Csv csv(ctx.file(".csv"), {c.scan_channel, "rate", "rate_over_half_channel", "Delta_q",
                                 "final_time", "final_survival", "below_threshold"});
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double v = c.scan_values[k];
        const auto& r = rows[k].r;
        csv.row({v, r.rate, v > 0.0 ? r.rate / (v / 2.0) : 0.0, r.Delta_q, r.final_time,
                 r.final_survival, rows[k].below ? 1.0 : 0.0});
        if (rows[k].below) ctx.warn("no measurable decay at " + c.scan_channel + " = " + format_number(v));
      }
      break;
    }
    case ScanKind::LeakageMap: {
      require_values(c.scan_Delta_q, "scan_Delta_q");
      require_values(c.scan_delta_q, "scan_delta_q");
      const auto map = leakage_map(p, c.scan_Delta_q, c.scan_delta_q, workers, c.scan_t_max);
      Csv csv(ctx.file(".csv"), {"Delta_q", "delta_q", "rate", "below_threshold"});
      for (const auto& cell : map.cells) {
        csv.row({cell.Delta_q, cell.delta_q, cell.rate, cell.below_threshold ? 1.0 : 0.0});
      }
      break;
    }
    case ScanKind::Dissipation: {
      require_values(c.scan_values, "scan_values");
      DissipationChannel ch;
      if (c.scan_channel == "kappa_q") {
        ch = DissipationChannel::KappaQ;
      } else if (c.scan_channel == "gamma_q") {
        ch = DissipationChannel::GammaQ;
      } else {
        throw Error(ErrorCode::InvalidArgument, "dissipation scan needs scan_channel kappa_q or gamma_q");
      }
      const auto pts = dissipation_scan_switching(p, ch, c.scan_values, c.sweep_T,
                                                  emission_options(c), workers);
      Csv csv(ctx.file(".csv"), {c.scan_channel, "P_out", "dissipated"});
      for (const auto& pt : pts) csv.row({pt.rate, pt.P_out, pt.dissipated});
      break;
    }
    case ScanKind::Passive: {
      require_values(c.scan_values, "scan_values");
      const auto runs = passive_emission(p, c.scan_values, c.integrator.t_end);
      Csv trace(ctx.file(".csv"), {"kappa_wq", "t", "intensity"});
      Csv summary(ctx.file("_summary.csv"),
                  {"kappa_wq", "P_out", "secondary_lobe_ratio", "skewness"});
      for (const auto& r : runs) {
        const auto I = r.output.intensity();
        for (std::size_t i = 0; i < I.size(); ++i) trace.row({r.kappa_wq, r.output.times[i], I[i]});
        summary.row({r.kappa_wq, emitted_probability(r.output), secondary_lobe_ratio(r.output),
                     intensity_skewness(r.output)});
      }
      break;
    }
  }
}

// ---- capture ---------------------------------------------------------------

void run_capture(Context& ctx) {
  const auto& c = ctx.config;
  const auto emission = shaped_emission_linear(c.scenario, c.sweep_T, emission_options(c));
  ctx.absorb(emission.run.warnings);

  CaptureResult cap;
  std::string drive;
  if (c.capture_drive == CaptureDrive::Mirrored) {
    cap = capture_mirrored(emission);
    drive = "mirrored";
  } else {
    // Gaussian of the emitted pulse's fitted width times capture_width_factor,
    // centred on the mirror image of the emitted pulse.
    const auto& out = emission.run.output;
    const double t0 = out.times.front();
    const double t1 = out.times.back();
    const double w = emission.metrics.gaussian.sigma * c.capture_width_factor;
    const double center = t0 + t1 - emission.metrics.gaussian.center;
    const double amp = std::pow(2.0 * std::numbers::pi * w * w, -0.25);
    auto points = emission.sweep.breakpoints();
    if (t1 > points.back().t) points.push_back({t1, points.back().value});
    const auto sweep = SweepProfile(emission.sweep.knob(), std::move(points)).reversed();
    cap = capture_run(c.scenario, sweep, DriveField::gaussian(amp, center, w),
                      c.integrator.sample_interval);
    drive = "gaussian";
  }
  ctx.absorb(cap.run.warnings);

  json j{{"drive", drive},
         {"captured", cap.captured},
         {"incident", cap.incident},
         {"reflected", cap.reflected},
         {"emission_P_out", emission.metrics.P_out},
         {"emission_xi", emission.metrics.xi},
         {"T", c.sweep_T},
         {"ledger", ledger_json(cap.run)}};
  write_json(ctx.file(".json"), j);
  write_output_record(ctx, "_output.csv", cap.run.output, nullptr);
}

}  // namespace

RunOutcome run(const RunConfig& input, const RunOptions& options) {
  RunConfig config = input;
  if (config.name.empty()) config.name = to_string(config.experiment);
  RunOutcome outcome;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + options.out_dir.string() + ": " + ec.message());

  Context ctx{config, options, outcome};
  const auto start = std::chrono::steady_clock::now();
  switch (config.experiment) {
    case Experiment::Spectrum: run_spectrum(ctx); break;
    case Experiment::Evolve: run_evolve(ctx); break;
    case Experiment::Shape: run_shape(ctx); break;
    case Experiment::Qudit: run_qudit(ctx); break;
    case Experiment::Scan: run_scan(ctx); break;
    case Experiment::Capture: run_capture(ctx); break;
  }
  outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json files = json::array();
  for (const auto& f : outcome.files) files.push_back(f.filename().string());
  json meta{{"experiment", to_string(config.experiment)},
            {"name", config.name},
            {"workers", options.workers},
            {"seconds", outcome.seconds},
            {"files", files},
            {"warnings", outcome.warnings}};
  if (config.experiment == Experiment::Scan) meta["scan_kind"] = to_string(config.scan_kind);
  write_json(options.out_dir / (config.name + ".meta.json"), meta);
  return outcome;
}

}  // namespace qswitch
