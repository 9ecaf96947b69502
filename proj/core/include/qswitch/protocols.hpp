#pragma once
// Named experiments built from spectra, dynamics and analysis: confinement
// loss, leakage maps, passive and shaped emission, sweep reconstruction,
// switch dissipation scans, temporal-qudit emission and photon capture.

#include <optional>
#include <vector>

#include "qswitch/analysis.hpp"
#include "qswitch/dynamics.hpp"
#include "qswitch/model.hpp"
#include "qswitch/spectra.hpp"
#include "qswitch/sweep.hpp"

namespace qswitch {

/// Two-level storage: confinement (off) and small-hopping resonance (res)
/// values of Delta_q.
struct SwitchPoints {
  double off;
  double res;
};
SwitchPoints switch_points(const ScenarioParams& params);

// ---- confinement ---------------------------------------------------------

struct ConfinementOptions {
  double t_max = 1e4;
  // Integration stops once the survival probability reaches this value.
  double stop_survival = 0.37;
  double sample_interval = 0.05;
};

struct ConfinementResult {
  double rate = 0.0;
  double Delta_q = 0.0;
  double final_time = 0.0;
  double final_survival = 1.0;
};

/// Holds Delta_q at the confinement point, starts in |-_s> and fits the
/// decay rate of the survival probability. Throws InsufficientDecay when the
/// survival never drops below 0.95 before t_max.
ConfinementResult confinement_run(const ScenarioParams& params, ConfinementOptions options = {});

/// Decay rate of |<-_s|psi(t)>|^2 for fixed detunings (params.Delta_q used as given).
ConfinementResult survival_decay(const ScenarioParams& params, ConfinementOptions options = {});

// ---- leakage map ---------------------------------------------------------

struct LeakageCell {
  double Delta_q;
  double delta_q;
  double rate;
  bool below_threshold;  // survival stayed above the fit window, rate reported as 0
};

struct LeakageMap {
  std::vector<double> Delta_q_grid;
  std::vector<double> delta_q_grid;
  // cells[j * Delta_q_grid.size() + i] is (Delta_q_grid[i], delta_q_grid[j]).
  std::vector<LeakageCell> cells;
  const LeakageCell& at(std::size_t i, std::size_t j) const {
    return cells[j * Delta_q_grid.size() + i];
  }
};

/// Cells are computed on up to `workers` threads and stored in grid order.
LeakageMap leakage_map(const ScenarioParams& params, const std::vector<double>& Delta_q_grid,
                       const std::vector<double>& delta_q_grid, unsigned workers = 1,
                       double t_max = 1e3);

// ---- emission ------------------------------------------------------------

struct PassiveEmission {
  double kappa_wq;
  OutputRecord output;
};

/// Delta_q held at the resonance point from t = 0, initial |-_s>.
std::vector<PassiveEmission> passive_emission(const ScenarioParams& params,
                                              const std::vector<double>& kappa_wq_list,
                                              double t_end = 60.0);

struct ShapedEmissionOptions {
  // Sweep endpoint = off + endpoint_fraction * (res - off).
  double endpoint_fraction = 1.5;
  // The hold after the sweep ends once the emitted probability grows by
  // less than plateau_increment per unit time, or after hold_max.
  double plateau_increment = 1e-5;
  double hold_max = 400.0;
  double sample_interval = 1e-2;
};

struct ExperimentResult {
  ScenarioParams params;
  SweepProfile sweep;
  IntegrationResult run;
  PulseMetrics metrics;
  // Empty when the reference state is degenerate within its site (g_s = 0).
  std::optional<AdiabaticityResult> adiabaticity;
  double J = 0.0;
  double Delta_q_off = 0.0;
  double Delta_q_res = 0.0;
  double Delta_q_end = 0.0;
};

/// Linear Delta_q sweep from the confinement point over duration T, then a
/// hold; initial state given (defaults to |-_s>, or |1_s> when g_s = 0).
ExperimentResult shaped_emission_linear(const ScenarioParams& params, double T,
                                        ShapedEmissionOptions options = {});

/// Runs an arbitrary Delta_q sweep with the same hold and metrics as the
/// linear protocol.
ExperimentResult run_emission(const ScenarioParams& params, const SweepProfile& sweep,
                              ShapedEmissionOptions options = {});

struct ReconstructionOptions {
  int iterations = 5;
  // Target Gaussian width; <= 0 uses width_factor times the trial's fitted sigma.
  double target_width = 0.0;
  double width_factor = 1.2;
  double min_improvement = 1e-4;
  int grid_points = 400;
};

enum class ReshapeMethod { TimeWarp, RateMap };

struct Reconstruction {
  ExperimentResult best;
  std::vector<double> xi_history;  // trial first, then each accepted step
  std::vector<ReshapeMethod> steps;
  int iterations_run = 0;
  bool improved = false;
  double target_width = 0.0;
};

/// Reshapes the trial sweep toward a Gaussian output of the target width.
/// Each iteration builds a time-warped and a rate-mapped candidate from the
/// current best run and keeps the better one if it lowers xi by at least
/// min_improvement while keeping P_out within 0.005 of the trial and the
/// sweep no longer than twice the trial's. Returns the
/// best run seen; `improved` is false if nothing beat the trial.
Reconstruction reconstruct_sweep(const ExperimentResult& trial, ReconstructionOptions options = {},
                                 ShapedEmissionOptions emission = {});

/// Time warp: the sweep whose cumulative emission would follow the Gaussian
/// (center, width) if emission tracked the knob value alone. Throws
/// NonMonotoneCumulative.
SweepProfile warp_sweep(const SweepProfile& trial_sweep, const OutputRecord& trial_output,
                        double center, double width, int grid_points = 400);

/// Rate map: reads the emission rate |f_out|^2 / norm^2 against the knob
/// value from a run, then picks the knob value at each time that gives the
/// hazard rate of the target Gaussian. Flat stretches at either end are
/// trimmed; the sweep starts at t = 0.
SweepProfile rate_map_sweep(const ExperimentResult& run, double center, double width,
                            int grid_points = 400);

enum class DissipationChannel { KappaQ, GammaQ };

struct DissipationPoint {
  double rate;
  double P_out;
  double dissipated;
};

/// Shaped linear emission repeated with one switch decay channel set to each
/// grid value (all other decays zero).
std::vector<DissipationPoint> dissipation_scan_switching(const ScenarioParams& params,
                                                         DissipationChannel channel,
                                                         const std::vector<double>& rates,
                                                         double T,
                                                         ShapedEmissionOptions options = {},
                                                         unsigned workers = 1);

// ---- temporal qudit ------------------------------------------------------

struct QuditTiming {
  double hold_off = 5.0;   // at each confinement point before its leg
  double leg = 40.0;       // sweep duration of each leg
  // Each leg runs off_i -> off_i + overshoot (res_i - off_i).
  double overshoot = 1.0;
  double hold_end = 45.0;  // at the leg's end while the pulse leaves
  double transit = 2.0;    // leg end -> next confinement point
  DressedBranch switch_branch = DressedBranch::Plus;
};

struct QuditResult {
  ScenarioParams params;
  // points[i - 1] belongs to storage branch i.
  std::vector<MultilevelPoints> points;
  SweepProfile sweep;
  IntegrationResult run;
  // In emission order: branch N-1 first, branch 1 last. Each pulse spans the
  // time window the plan gives its branch; area and center are taken there.
  std::vector<PulseSegment> pulses;
  std::vector<double> pulse_xi;
  std::vector<int> pulse_branch;
  double premature_loss = 0.0;  // emitted or dissipated before the first leg starts
  double remaining = 0.0;       // norm^2 at the end
  double P_out = 0.0;
};

/// Prepares sum_i c_i |branch_i> at the first confinement point and emits
/// the branches in descending order. coefficients[i - 1] multiplies branch i.
/// |f_out|^2 must fall below segment_threshold times its peak at every
/// window boundary and rise above it inside every populated window. Throws UnresolvedResonance or PulseOverlap.
QuditResult qudit_emission(const ScenarioParams& params, const std::vector<Complex>& coefficients,
                           QuditTiming timing = {}, double segment_threshold = 1e-2);

// ---- capture -------------------------------------------------------------

struct CaptureResult {
  double captured = 0.0;      // norm^2 at the end of the reversed sweep
  double incident = 0.0;      // integral |f_in|^2
  double reflected = 0.0;     // integral |f_out|^2
  IntegrationResult run;
};

/// Drives the system from the ground state with `drive` while running `sweep`.
CaptureResult capture_run(const ScenarioParams& params, const SweepProfile& sweep,
                          const DriveField& drive, double sample_interval = 1e-2);

/// Time mirror of an emission run: f_in(t) = -conj(f_out(t_end - t)) with
/// the reversed sweep.
CaptureResult capture_mirrored(const ExperimentResult& emission);

}  // namespace qswitch
