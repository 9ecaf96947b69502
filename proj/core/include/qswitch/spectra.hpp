#pragma once

// One-excitation Hamiltonian, its eigensystem, and the closed-form spectral
// quantities of the coupled storage/switch system: confinement and resonance
// detunings, dressed energies of the ladder atom, hopping matrix elements and
// the adiabaticity measure of a detuning sweep.

#include <span>
#include <vector>

#include "qswitch/linalg.hpp"
#include "qswitch/model.hpp"
#include "qswitch/sweep.hpp"

namespace qswitch {

/// Real symmetric d x d matrix in basis order; see model.hpp.
using ManifoldMatrix = Matrix;

ManifoldMatrix build_matrix(const ScenarioParams& params, double Delta_s, double Delta_q);

/// Matrix of d(H)/d(knob): the projector onto the atomic levels the knob shifts.
ManifoldMatrix knob_derivative_matrix(const ScenarioParams& params, Knob knob);

/// Eigenvalues ascending, orthonormal eigenvectors as columns, largest
/// component of each vector positive. Throws NoConvergence.
SymmetricEigensystem eigensystem(const ManifoldMatrix& m);

struct BranchPoint {
  double energy;
  std::vector<double> vector;
};

/// Eigen-branches continued across a knob grid by maximum eigenvector
/// overlap. branches[b][k] is branch b at knob_grid[k]; branches are numbered
/// by ascending energy at the first grid point.
struct BranchTable {
  Knob knob = Knob::DeltaQ;
  std::vector<double> knob_grid;
  std::vector<std::vector<BranchPoint>> branches;

  std::size_t dimension() const { return branches.size(); }
  /// Branch whose energy at grid point k is closest to `energy`.
  std::size_t branch_nearest(std::size_t k, double energy) const;
};

/// Throws GridTooCoarse when some consecutive overlap drops below 0.5 or two
/// branches claim the same successor.
BranchTable track_branches(const ScenarioParams& params, Knob knob, std::span<const double> grid);

struct Anticrossing {
  double position;
  double gap;
  std::size_t lower_index;  // sorted eigenvalue index of the lower member of the pair
};

/// Minimum gap between adjacent eigenvalues within [center - half_width,
/// center + half_width], refined by golden-section/Brent minimization.
Anticrossing locate_anticrossing(const ScenarioParams& params, Knob knob, double center,
                                 double half_width);

enum class DressedBranch { Minus, Plus };

struct DressedState {
  double energy;
  double photon;  // amplitude on the cavity photon
  double atom;    // amplitude on the excited atom
};

/// Eigenstates of the isolated switch site q (cavity at delta_q, atom at Delta_q).
DressedState switch_dressed_state(const ScenarioParams& params, double Delta_q,
                                  DressedBranch branch);

/// Isolated storage-site block (PhotonS plus the AtomS ladder), N x N.
Matrix storage_block(const ScenarioParams& params, double Delta_s);

/// Energies of the isolated storage site, ascending. Branch i (1-based) is the
/// i-th lowest; branch 1 is |-_s> for a two-level atom.
std::vector<double> storage_energies(const ScenarioParams& params, double Delta_s);

/// Isolated storage-site eigenvector for branch i embedded in the full basis
/// (zeros on site q). Sign: largest component positive.
std::vector<double> storage_state(const ScenarioParams& params, double Delta_s, int branch);

/// Energy of the lower storage dressed state |-_s>; equals -g_s at Delta_s = 0.
double off_detuning_two_level(const ScenarioParams& params);

/// Small-hopping estimate of the storage/switch resonance,
/// -g_s + g_q^2 / (delta_q + g_s). Throws DegenerateDenominator.
double res_detuning_two_level(const ScenarioParams& params);

struct ThreeLevelEnergies {
  double lower;   // |u_s>, the branch emitted last
  double middle;  // |v_s>, the branch emitted first
  double upper;
};

/// Trigonometric cubic solution for the isolated three-level storage site at
/// delta_s = 0. Uses p^2 = Delta_s^2 + 3 (g_s^2 + Omega_s^2); with the factor 2
/// the Delta_s = 0 roots come out as -p/sqrt(3) != -sqrt(g_s^2 + Omega_s^2).
ThreeLevelEnergies dressed_energies_three_level(double g_s, double Omega_s, double Delta_s);

struct MultilevelPoints {
  double resonance;  // storage branch energy equals the chosen switch dressed energy
  double off;        // storage branch energy equals Delta_q (two-photon resonance)
};

/// Delta_s values for storage branch i (1-based, i <= N-1). Throws NoBracket.
MultilevelPoints resonance_and_off_points_multilevel(const ScenarioParams& params, int branch,
                                                     DressedBranch switch_branch);

/// Switch mixing angle atan2(2 g_q, Delta_q - delta_q) / 2 in (0, pi/2).
double switch_mixing_angle(const ScenarioParams& params, double Delta_q);

/// |<±_q| kappa_sq a_q^dag a_s |-_s>| at Delta_s = 0 in closed form:
/// (kappa_sq/sqrt 2) sin(Theta) for the Plus branch and cos(Theta) for Minus.
double coupling_element_J(const ScenarioParams& params, double Delta_q, DressedBranch branch);

/// |<switch| kappa_sq a_q^dag a_s |storage>| from explicit vectors (full basis).
double hopping_matrix_element(const ScenarioParams& params, std::span<const double> switch_state,
                              std::span<const double> storage_state);

struct JBetaResult {
  double value;        // reported element (closed form unless it disagrees)
  double closed_form;
  double direct;
  bool formula_mismatch;
};

/// Hopping element between switch branch and three-level storage branch
/// beta (1 = lower |u_s>, 2 = middle |v_s>) at Delta_s, via
/// kappa_sq g_s Omega_s w_q / N_beta with
/// N_beta^2 = E^2 Omega^2 + (E^2 - E Delta_s - g_s^2)^2 + g_s^2 Omega^2
/// and w_q the photonic amplitude of the switch branch.
JBetaResult coupling_element_J_beta(const ScenarioParams& params, double Delta_s, int beta,
                                    DressedBranch switch_branch);

struct AdiabaticityResult {
  double value = 0.0;
  double time = 0.0;
};

/// max_t |<Phi| dH/dt |Phi'>| / (E_Phi - E_Phi')^2 along the sweep, where Phi
/// starts as the eigenstate closest to `reference` and is continued by
/// overlap, and Phi' is its nearest neighbour in energy. Throws DegenerateGap.
AdiabaticityResult adiabaticity(const ScenarioParams& params, const SweepProfile& sweep,
                                std::span<const double> times, std::span<const double> reference);

}  // namespace qswitch
