#include "qswitch/spectra.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "qswitch/error.hpp"

namespace qswitch {

ManifoldMatrix build_matrix(const ScenarioParams& p, double Delta_s, double Delta_q) {
  validate(p);
  const std::size_t d = manifold_dimension(p);
  ManifoldMatrix h(d, d);
  const std::size_t ps = photon_s_index();
  const std::size_t pq = photon_q_index(p);
  const std::size_t aq = atom_q_index(p);

  h(ps, atom_s_index(1)) = h(atom_s_index(1), ps) = p.g_s;
  h(atom_s_index(1), atom_s_index(1)) = Delta_s;
  for (int rung = 2; rung < p.levels_s; ++rung) {
    const auto r = atom_s_index(rung);
    h(r, r) = Delta_s + p.delta_s_i[static_cast<std::size_t>(rung - 2)];
    h(r - 1, r) = h(r, r - 1) = p.Omega_s[static_cast<std::size_t>(rung - 2)];
  }

  h(ps, pq) = h(pq, ps) = p.kappa_sq;
  h(pq, pq) = p.delta_q;
  h(pq, aq) = h(aq, pq) = p.g_q;
  h(aq, aq) = Delta_q;
  return h;
}

ManifoldMatrix knob_derivative_matrix(const ScenarioParams& p, Knob knob) {
  const std::size_t d = manifold_dimension(p);
  ManifoldMatrix m(d, d);
  if (knob == Knob::DeltaQ) {
    m(atom_q_index(p), atom_q_index(p)) = 1.0;
  } else {
    for (int rung = 1; rung < p.levels_s; ++rung) m(atom_s_index(rung), atom_s_index(rung)) = 1.0;
  }
  return m;
}

SymmetricEigensystem eigensystem(const ManifoldMatrix& m) {
  if (m.asymmetry() > 1e-12 * std::max(1.0, m.frobenius_norm())) {
    throw Error(ErrorCode::InvalidArgument, "eigensystem needs a symmetric matrix");
  }
  return jacobi_eigensystem(m);
}

namespace {

ManifoldMatrix matrix_at(const ScenarioParams& p, Knob knob, double value) {
  return knob == Knob::DeltaQ ? build_matrix(p, p.Delta_s, value)
                              : build_matrix(p, value, p.Delta_q);
}

}  // namespace

std::size_t BranchTable::branch_nearest(std::size_t k, double energy) const {
  std::size_t best = 0;
  for (std::size_t b = 1; b < branches.size(); ++b) {
    if (std::abs(branches[b][k].energy - energy) < std::abs(branches[best][k].energy - energy)) {
      best = b;
    }
  }
  return best;
}

BranchTable track_branches(const ScenarioParams& params, Knob knob, std::span<const double> grid) {
  if (grid.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "branch tracking needs at least two grid points");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "branch grid must increase strictly");
    }
  }
  const std::size_t d = manifold_dimension(params);
  BranchTable table;
  table.knob = knob;
  table.knob_grid.assign(grid.begin(), grid.end());
  table.branches.assign(d, {});
  for (auto& b : table.branches) b.reserve(grid.size());

  auto first = eigensystem(matrix_at(params, knob, grid[0]));
  for (std::size_t b = 0; b < d; ++b) {
    table.branches[b].push_back({first.values[b], first.vectors.column(b)});
  }

  std::vector<int> claimed(d);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    auto es = eigensystem(matrix_at(params, knob, grid[k]));
    std::vector<std::vector<double>> columns(d);
    for (std::size_t j = 0; j < d; ++j) columns[j] = es.vectors.column(j);
    std::fill(claimed.begin(), claimed.end(), -1);
    for (std::size_t b = 0; b < d; ++b) {
      const auto& prev = table.branches[b].back().vector;
      std::size_t best = 0;
      double best_overlap = -1.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double ov = std::abs(dot(prev, columns[j]));
        if (ov > best_overlap) {
          best_overlap = ov;
          best = j;
        }
      }
      if (best_overlap < 0.5 || claimed[best] >= 0) {
        throw Error(ErrorCode::GridTooCoarse,
                    "ambiguous branch continuation between knob values " +
                        std::to_string(grid[k - 1]) + " and " + std::to_string(grid[k]));
      }
      claimed[best] = static_cast<int>(b);
      table.branches[b].push_back({es.values[best], columns[best]});
    }
  }
  return table;
}

Anticrossing locate_anticrossing(const ScenarioParams& params, Knob knob, double center,
                                 double half_width) {
  if (!(half_width > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "anticrossing bracket must have positive width");
  }
  const std::size_t d = manifold_dimension(params);
  constexpr int kCoarse = 400;
  const double lo = center - half_width;
  const double step = 2.0 * half_width / kCoarse;

  auto gap_at = [&](double x, std::size_t i) {
    const auto es = eigensystem(matrix_at(params, knob, x));
    return es.values[i + 1] - es.values[i];
  };

  double best_gap = std::numeric_limits<double>::infinity();
  double best_x = center;
  std::size_t best_i = 0;
  for (int k = 0; k <= kCoarse; ++k) {
    const double x = lo + step * k;
    const auto es = eigensystem(matrix_at(params, knob, x));
    for (std::size_t i = 0; i + 1 < d; ++i) {
      const double gap = es.values[i + 1] - es.values[i];
      if (gap < best_gap) {
        best_gap = gap;
        best_x = x;
        best_i = i;
      }
    }
  }

  const auto [x_min, gap_min] = boost::math::tools::brent_find_minima(
      [&](double x) { return gap_at(x, best_i); }, best_x - step, best_x + step,
      std::numeric_limits<double>::digits / 2);
  return {x_min, gap_min, best_i};
}

double switch_mixing_angle(const ScenarioParams& p, double Delta_q) {
  return 0.5 * std::atan2(2.0 * p.g_q, Delta_q - p.delta_q);
}

DressedState switch_dressed_state(const ScenarioParams& p, double Delta_q, DressedBranch branch) {
  const double mean = 0.5 * (p.delta_q + Delta_q);
  const double half_split = std::hypot(0.5 * (Delta_q - p.delta_q), p.g_q);
  const double theta = switch_mixing_angle(p, Delta_q);
  if (branch == DressedBranch::Plus) {
    return {mean + half_split, std::sin(theta), std::cos(theta)};
  }
  return {mean - half_split, std::cos(theta), -std::sin(theta)};
}

Matrix storage_block(const ScenarioParams& p, double Delta_s) {
  validate(p);
  const auto n = static_cast<std::size_t>(p.levels_s);
  const auto full = build_matrix(p, Delta_s, p.Delta_q);
  Matrix block(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) block(r, c) = full(r, c);
  return block;
}

std::vector<double> storage_energies(const ScenarioParams& p, double Delta_s) {
  return eigensystem(storage_block(p, Delta_s)).values;
}

std::vector<double> storage_state(const ScenarioParams& p, double Delta_s, int branch) {
  if (branch < 1 || branch > p.levels_s) {
    throw Error(ErrorCode::InvalidArgument,
                "storage branch " + std::to_string(branch) + " out of range");
  }
  const auto es = eigensystem(storage_block(p, Delta_s));
  std::vector<double> v(manifold_dimension(p), 0.0);
  for (std::size_t r = 0; r < static_cast<std::size_t>(p.levels_s); ++r) {
    v[r] = es.vectors(r, static_cast<std::size_t>(branch - 1));
  }
  return v;
}

double off_detuning_two_level(const ScenarioParams& p) {
  validate(p);
  return 0.5 * p.Delta_s - std::hypot(0.5 * p.Delta_s, p.g_s);
}

double res_detuning_two_level(const ScenarioParams& p) {
  validate(p);
  const double denom = p.delta_q + p.g_s;
  if (std::abs(denom) < 1e-9) {
    throw Error(ErrorCode::DegenerateDenominator, "delta_q + g_s vanishes");
  }
  return -p.g_s + p.g_q * p.g_q / denom;
}

ThreeLevelEnergies dressed_energies_three_level(double g_s, double Omega_s, double Delta_s) {
  const double coupling2 = g_s * g_s + Omega_s * Omega_s;
  const double p = std::sqrt(Delta_s * Delta_s + 3.0 * coupling2);
  if (p == 0.0) return {0.0, 0.0, 0.0};
  const double cos_theta = std::clamp(
      -(Delta_s / (p * p * p)) * (Delta_s * Delta_s + 9.0 * (0.5 * g_s * g_s - Omega_s * Omega_s)),
      -1.0, 1.0);
  const double third = std::acos(cos_theta) / 3.0;
  constexpr double pi = std::numbers::pi;
  auto root = [&](double phase) { return -(-2.0 * Delta_s + 2.0 * p * std::cos(third + phase)) / 3.0; };
  return {root(-pi / 3.0), root(pi / 3.0), root(pi)};
}

namespace {

double find_root_in_scan(const std::function<double(double)>& f, double lo, double hi, int steps,
                         const char* what) {
  const double step = (hi - lo) / steps;
  double x0 = lo;
  double f0 = f(x0);
  for (int k = 1; k <= steps; ++k) {
    const double x1 = lo + step * k;
    const double f1 = f(x1);
    if (f0 == 0.0) return x0;
    if ((f0 < 0.0) != (f1 < 0.0)) {
      std::uintmax_t iterations = 200;
      const auto [a, b] = boost::math::tools::toms748_solve(
          f, x0, x1, f0, f1, boost::math::tools::eps_tolerance<double>(52), iterations);
      const double x = 0.5 * (a + b);
      if (std::abs(f(x)) > 1e-9) {
        throw Error(ErrorCode::NoBracket, std::string(what) + ": root refinement stalled");
      }
      return x;
    }
    x0 = x1;
    f0 = f1;
  }
  throw Error(ErrorCode::NoBracket, std::string(what) + ": no sign change in [" +
                                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

MultilevelPoints resonance_and_off_points_multilevel(const ScenarioParams& p, int branch,
                                                     DressedBranch switch_branch) {
  validate(p);
  if (p.levels_s < 3) {
    throw Error(ErrorCode::InvalidArgument, "multilevel points need levels_s >= 3");
  }
  if (branch < 1 || branch > p.levels_s - 1) {
    throw Error(ErrorCode::InvalidArgument, "storage branch must lie in 1 .. levels_s - 1");
  }
  const double target_res = switch_dressed_state(p, p.Delta_q, switch_branch).energy;
  const double target_off = p.Delta_q;
  double scale = 1.0 + p.g_s + p.g_q + std::abs(p.delta_q) + std::abs(p.Delta_q);
  for (double w : p.Omega_s) scale += w;
  for (double d : p.delta_s_i) scale += std::abs(d);
  const double range = 20.0 * scale;
  const auto idx = static_cast<std::size_t>(branch - 1);

  auto energy = [&](double Delta_s) { return storage_energies(p, Delta_s)[idx]; };
  MultilevelPoints out{};
  out.resonance = find_root_in_scan([&](double x) { return energy(x) - target_res; }, -range,
                                    range, 4000, "resonance point");
  out.off = find_root_in_scan([&](double x) { return energy(x) - target_off; }, -range, range,
                              4000, "off point");
  return out;
}

double coupling_element_J(const ScenarioParams& p, double Delta_q, DressedBranch branch) {
  const double theta = switch_mixing_angle(p, Delta_q);
  const double weight = branch == DressedBranch::Plus ? std::sin(theta) : std::cos(theta);
  return p.kappa_sq / std::numbers::sqrt2 * weight;
}

double hopping_matrix_element(const ScenarioParams& p, std::span<const double> switch_state,
                              std::span<const double> storage) {
  return std::abs(p.kappa_sq * switch_state[photon_q_index(p)] * storage[photon_s_index()]);
}

JBetaResult coupling_element_J_beta(const ScenarioParams& p, double Delta_s, int beta,
                                    DressedBranch switch_branch) {
  validate(p);
  if (p.levels_s != 3) {
    throw Error(ErrorCode::InvalidArgument, "J_beta is defined for a three-level storage atom");
  }
  if (beta != 1 && beta != 2) {
    throw Error(ErrorCode::InvalidArgument, "beta must be 1 (u) or 2 (v)");
  }
  const double omega = p.Omega_s[0];
  const double energy = storage_energies(p, Delta_s)[static_cast<std::size_t>(beta - 1)];
  const double inner = energy * energy - energy * Delta_s - p.g_s * p.g_s;
  const double norm = std::sqrt(energy * energy * omega * omega + inner * inner +
                                p.g_s * p.g_s * omega * omega);
  const auto q = switch_dressed_state(p, p.Delta_q, switch_branch);

  JBetaResult out{};
  out.closed_form = norm > 0.0 ? p.kappa_sq * p.g_s * omega / norm * std::abs(q.photon) : 0.0;

  std::vector<double> switch_vec(manifold_dimension(p), 0.0);
  switch_vec[photon_q_index(p)] = q.photon;
  switch_vec[atom_q_index(p)] = q.atom;
  out.direct = hopping_matrix_element(p, switch_vec, storage_state(p, Delta_s, beta));
  out.formula_mismatch = std::abs(out.closed_form - out.direct) > 1e-6;
  out.value = out.formula_mismatch ? out.direct : out.closed_form;
  return out;
}

AdiabaticityResult adiabaticity(const ScenarioParams& p, const SweepProfile& sweep,
                                std::span<const double> times, std::span<const double> reference) {
  validate(p);
  if (times.empty()) return {};
  const std::size_t d = manifold_dimension(p);
  const auto dh = knob_derivative_matrix(p, sweep.knob());
  AdiabaticityResult out;
  std::vector<double> tracked(reference.begin(), reference.end());

  for (double t : times) {
    const double knob_value = sweep(t);
    const auto es = eigensystem(matrix_at(p, sweep.knob(), knob_value));
    std::size_t phi = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double ov = std::abs(dot(tracked, es.vectors.column(j)));
      if (ov > best) {
        best = ov;
        phi = j;
      }
    }
    tracked = es.vectors.column(phi);

    std::size_t neighbour = phi == 0 ? 1 : phi - 1;
    for (std::size_t j = 0; j < d; ++j) {
      if (j == phi) continue;
      if (std::abs(es.values[j] - es.values[phi]) <
          std::abs(es.values[neighbour] - es.values[phi])) {
        neighbour = j;
      }
    }
    const double gap = es.values[phi] - es.values[neighbour];
    if (std::abs(gap) < 1e-12) {
      throw Error(ErrorCode::DegenerateGap, "degenerate gap at t = " + std::to_string(t));
    }
    const double rate = sweep.rate(t);
    if (rate == 0.0) continue;
    const auto other = es.vectors.column(neighbour);
    const double element = dot(tracked, dh.apply(other)) * rate;
    const double a = std::abs(element) / (gap * gap);
    if (a > out.value) {
      out.value = a;
      out.time = t;
    }
  }
  return out;
}

}  // namespace qswitch
