#pragma once

// Parameter and state data model. All frequencies are in units of the
// intercavity hopping rate kappa_sq (which is therefore exactly 1) and all
// times in units of 1/kappa_sq, with hbar = 1.
//
// Basis of the one-excitation manifold, fixed order, dimension d = N + 2:
//   0            PhotonS    |g_s, 1_s>
//   1 .. N-1     AtomS(i)   |e_{s;i}, 0_s>
//   N            PhotonQ    |g_q, 1_q>
//   N + 1        AtomQ      |e_q, 0_q>

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace qswitch {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

struct ScenarioParams {
  double g_s = 0.0;
  double g_q = 0.0;
  double kappa_sq = 1.0;
  double kappa_wq = 0.0;
  double delta_q = 0.0;
  double Delta_s = 0.0;
  double Delta_q = 0.0;
  double kappa_s = 0.0;
  double kappa_q = 0.0;
  double gamma_s = 0.0;
  double gamma_q = 0.0;
  int levels_s = 2;
  // Ladder drives |e_{s;i}> <-> |e_{s;i+1}>, i = 1 .. N-2.
  std::vector<double> Omega_s;
  // Ladder detunings; entry i-1 shifts rung i+1, so delta_s_i[0] is the
  // three-level delta_s.
  std::vector<double> delta_s_i;

  bool operator==(const ScenarioParams&) const = default;
};

/// Throws Error on the first violated invariant; returns normally otherwise.
void validate(const ScenarioParams& params);

struct BasisLabel {
  enum class Kind { PhotonS, AtomS, PhotonQ, AtomQ };
  Kind kind;
  int rung = 0;  // 1-based ladder index for AtomS, 0 otherwise

  bool operator==(const BasisLabel&) const = default;
};

std::string to_string(const BasisLabel& label);

std::vector<BasisLabel> basis(const ScenarioParams& params);

inline std::size_t manifold_dimension(const ScenarioParams& p) {
  return static_cast<std::size_t>(p.levels_s) + 2;
}

// Index helpers into the basis order above.
inline std::size_t photon_s_index() { return 0; }
inline std::size_t atom_s_index(int rung) { return static_cast<std::size_t>(rung); }
inline std::size_t photon_q_index(const ScenarioParams& p) {
  return static_cast<std::size_t>(p.levels_s);
}
inline std::size_t atom_q_index(const ScenarioParams& p) {
  return static_cast<std::size_t>(p.levels_s) + 1;
}

/// Cumulative probability lost to each incoherent channel.
struct LossLedger {
  double kappa_s = 0.0;
  double kappa_q = 0.0;
  double gamma_s = 0.0;
  double gamma_q = 0.0;

  double total() const { return kappa_s + kappa_q + gamma_s + gamma_q; }
};

struct AmplitudeTrajectory {
  std::vector<double> times;
  std::vector<ComplexVector> amplitudes;
  std::vector<double> emitted;
  std::vector<LossLedger> dissipated;

  std::size_t size() const { return times.size(); }
  double norm2(std::size_t sample) const;
  /// norm^2 + emitted + dissipated at a sample; 1 for a closed ledger.
  double ledger_total(std::size_t sample) const;
};

/// Waveguide input and output field amplitudes, f_out = f_in + sqrt(kappa_wq) C_q.
struct OutputRecord {
  std::vector<double> times;
  ComplexVector f_in;
  ComplexVector f_out;

  std::size_t size() const { return times.size(); }
  std::vector<double> intensity() const;
};

double norm2(const ComplexVector& v);

}  // namespace qswitch
