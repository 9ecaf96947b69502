#pragma once

// Time evolution of the one-excitation amplitudes under the non-Hermitian
// effective Hamiltonian (incoherent decays as -rate/2 damping terms), with
// coherent out-coupling of the switch cavity into the waveguide, an optional
// input field and a detuning sweep. The waveguide continuum is not stored:
// it appears only through kappa_wq and the input/output record.

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qswitch/model.hpp"
#include "qswitch/sweep.hpp"

namespace qswitch {

struct IntegratorSettings {
  enum class Method { RK4, DormandPrince };

  Method method = Method::RK4;
  double t_start = 0.0;
  double t_end = 100.0;
  // Fixed step for RK4; <= 0 selects the default rule (see default_time_step).
  double dt = 0.0;
  // Adaptive Dormand-Prince controls.
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double dt_min = 1e-10;
  double dt_max = 0.05;
  // Trajectory samples are stored on this uniform grid.
  double sample_interval = 1e-2;
};

void validate(const IntegratorSettings& settings);

/// min(1e-3, 0.05 / largest rate or detuning magnitude in the problem).
double default_time_step(const ScenarioParams& params, const SweepProfile& sweep);

/// Input field f_in(t) in units of sqrt(kappa_sq).
class DriveField {
 public:
  struct Gaussian {
    Complex amplitude;
    double center;
    double width;  // rms width of |f_in|^2
    double carrier_detuning;
  };
  struct Tabulated {
    std::vector<double> times;
    ComplexVector values;
  };

  DriveField() = default;
  static DriveField zero() { return {}; }
  static DriveField gaussian(Complex amplitude, double center, double width,
                             double carrier_detuning = 0.0);
  /// Linear interpolation of real and imaginary parts; zero outside the table.
  static DriveField tabulated(std::vector<double> times, ComplexVector values);

  Complex operator()(double t) const;
  bool is_zero() const { return std::holds_alternative<std::monostate>(shape_); }

 private:
  std::variant<std::monostate, Gaussian, Tabulated> shape_;
};

/// Right-hand side of the amplitude equations in basis order, with the swept
/// knob taken from `sweep` at time t and every other detuning from params.
ComplexVector derivative(double t, std::span<const Complex> amplitudes,
                         const ScenarioParams& params, const SweepProfile& sweep,
                         const DriveField& drive);

struct IntegrationResult {
  AmplitudeTrajectory trajectory;
  OutputRecord output;
  std::vector<std::string> warnings;
};

/// Called at every stored sample; returning true ends the integration there.
using StopPredicate =
    std::function<bool(double t, std::span<const Complex> amplitudes, double emitted,
                       const LossLedger& dissipated)>;

/// Integrates the amplitudes together with the probability ledger (emitted
/// and per-channel dissipated probability), so the ledger is accumulated at
/// the integrator's order. Throws StepUnderflow or NonFiniteState.
IntegrationResult integrate(const ScenarioParams& params, const SweepProfile& sweep,
                            std::span<const Complex> initial, const DriveField& drive,
                            const IntegratorSettings& settings, const StopPredicate& stop = {});

/// |<reference|psi(t)>|^2 for every trajectory sample.
std::vector<double> survival_overlap(const AmplitudeTrajectory& trajectory,
                                     std::span<const Complex> reference);

ComplexVector to_complex(std::span<const double> v);

/// |g_s, 1_s>.
ComplexVector photon_s_state(const ScenarioParams& params);

/// Isolated storage eigenstate (branch 1 = lowest, i.e. |-_s> for N = 2).
ComplexVector storage_branch_state(const ScenarioParams& params, double Delta_s, int branch);

/// sum_i c_i |state_i>; coefficients need not be normalized.
ComplexVector superpose(std::span<const Complex> coefficients,
                        std::span<const ComplexVector> states);

}  // namespace qswitch
