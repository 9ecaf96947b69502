#pragma once
// Flat run configuration: `key = value` lines, `#` comments, comma-separated
// lists. An optional `[physical_units]` block holding `kappa_sq_hz` makes
// every rate and detuning key a frequency in Hz, divided by kappa_sq_hz at
// parse time. Times are always in units of 1/kappa_sq.

#include <string>
#include <string_view>
#include <vector>

#include "qswitch/dynamics.hpp"
#include "qswitch/model.hpp"
#include "qswitch/protocols.hpp"
#include "qswitch/sweep.hpp"

namespace qswitch {

enum class Experiment { Spectrum, Evolve, Shape, Qudit, Scan, Capture };
std::string to_string(Experiment e);

enum class ScanKind { Confinement, LeakageMap, Dissipation, Passive };
std::string to_string(ScanKind k);

enum class InitialState { StorageBranch, PhotonS, Ground };

enum class CaptureDrive { Mirrored, Gaussian };

struct RunConfig {
  ScenarioParams scenario;
  Experiment experiment = Experiment::Spectrum;
  std::string name;  // output file stem; load_config falls back to the file stem,
                    // run() to the experiment name
  IntegratorSettings integrator;

  // spectrum
  Knob spectrum_knob = Knob::DeltaQ;
  double spectrum_min = -20.0;
  double spectrum_max = 80.0;
  int spectrum_points = 2001;

  // evolve: piecewise-linear sweep through (sweep_times, sweep_values); an
  // empty table holds the knob at its scenario value.
  Knob sweep_knob = Knob::DeltaQ;
  std::vector<double> sweep_times;
  std::vector<double> sweep_values;
  InitialState initial = InitialState::StorageBranch;
  int initial_branch = 1;

  // shape and capture: linear emission sweep
  double sweep_T = 20.0;
  double sweep_endpoint_fraction = 1.5;
  double hold_max = 400.0;
  bool reconstruct = false;
  ReconstructionOptions reconstruction;

  // qudit
  std::vector<double> qudit_coefficients;
  QuditTiming qudit;
  double qudit_threshold = 1e-2;

  // scan
  ScanKind scan_kind = ScanKind::Confinement;
  std::string scan_channel = "kappa_s";
  std::vector<double> scan_values;
  std::vector<double> scan_Delta_q;
  std::vector<double> scan_delta_q;
  double scan_t_max = 1e4;

  // capture
  CaptureDrive capture_drive = CaptureDrive::Mirrored;
  double capture_width_factor = 1.0;
};

/// Throws UnknownKey, ParseError (message carries the line number),
/// UnitConflict, or the scenario validation errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

}  // namespace qswitch
