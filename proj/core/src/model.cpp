#include "qswitch/model.hpp"

#include <cmath>
#include <string>

#include "qswitch/error.hpp"

namespace qswitch {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonPositiveKappaSq: return "NonPositiveKappaSq";
    case ErrorCode::InvalidLevelCount: return "InvalidLevelCount";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InvalidIntegrator: return "InvalidIntegrator";
    case ErrorCode::InsufficientDecay: return "InsufficientDecay";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoPulse: return "NoPulse";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NonMonotoneCumulative: return "NonMonotoneCumulative";
    case ErrorCode::UnresolvedResonance: return "UnresolvedResonance";
    case ErrorCode::PulseOverlap: return "PulseOverlap";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnitConflict: return "UnitConflict";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeRate:
    case ErrorCode::LengthMismatch:
    case ErrorCode::NonPositiveKappaSq:
    case ErrorCode::InvalidLevelCount:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::InvalidIntegrator:
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownKey:
    case ErrorCode::ParseError:
    case ErrorCode::UnitConflict:
    case ErrorCode::IoError:
      return true;
    default:
      return false;
  }
}

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteValue, std::string(name) + " is not finite");
  }
}

void require_rate(double value, const char* name) {
  require_finite(value, name);
  if (value < 0.0) {
    throw Error(ErrorCode::NegativeRate,
                std::string(name) + " = " + std::to_string(value) + " must be >= 0");
  }
}

}  // namespace

void validate(const ScenarioParams& p) {
  require_finite(p.kappa_sq, "kappa_sq");
  if (p.kappa_sq <= 0.0) {
    throw Error(ErrorCode::NonPositiveKappaSq, "kappa_sq must be > 0");
  }
  if (p.kappa_sq != 1.0) {
    throw Error(ErrorCode::UnitConflict,
                "kappa_sq is the unit of frequency and must equal 1");
  }
  require_rate(p.g_s, "g_s");
  require_rate(p.g_q, "g_q");
  require_rate(p.kappa_wq, "kappa_wq");
  require_rate(p.kappa_s, "kappa_s");
  require_rate(p.kappa_q, "kappa_q");
  require_rate(p.gamma_s, "gamma_s");
  require_rate(p.gamma_q, "gamma_q");
  require_finite(p.delta_q, "delta_q");
  require_finite(p.Delta_s, "Delta_s");
  require_finite(p.Delta_q, "Delta_q");

  if (p.levels_s < 2) {
    throw Error(ErrorCode::InvalidLevelCount, "levels_s must be >= 2");
  }
  const auto ladder = static_cast<std::size_t>(p.levels_s - 2);
  if (p.Omega_s.size() != ladder || p.delta_s_i.size() != ladder) {
    throw Error(ErrorCode::LengthMismatch,
                "Omega_s and delta_s_i need levels_s - 2 = " + std::to_string(ladder) +
                    " entries, got " + std::to_string(p.Omega_s.size()) + " and " +
                    std::to_string(p.delta_s_i.size()));
  }
  for (double omega : p.Omega_s) require_rate(omega, "Omega_s");
  for (double d : p.delta_s_i) require_finite(d, "delta_s_i");
}

std::string to_string(const BasisLabel& label) {
  switch (label.kind) {
    case BasisLabel::Kind::PhotonS: return "PhotonS";
    case BasisLabel::Kind::AtomS: return "AtomS" + std::to_string(label.rung);
    case BasisLabel::Kind::PhotonQ: return "PhotonQ";
    case BasisLabel::Kind::AtomQ: return "AtomQ";
  }
  return "?";
}

std::vector<BasisLabel> basis(const ScenarioParams& params) {
  validate(params);
  std::vector<BasisLabel> labels;
  labels.reserve(manifold_dimension(params));
  labels.push_back({BasisLabel::Kind::PhotonS, 0});
  for (int rung = 1; rung < params.levels_s; ++rung) {
    labels.push_back({BasisLabel::Kind::AtomS, rung});
  }
  labels.push_back({BasisLabel::Kind::PhotonQ, 0});
  labels.push_back({BasisLabel::Kind::AtomQ, 0});
  return labels;
}

double norm2(const ComplexVector& v) {
  double sum = 0.0;
  for (const auto& c : v) sum += std::norm(c);
  return sum;
}

double AmplitudeTrajectory::norm2(std::size_t sample) const {
  return qswitch::norm2(amplitudes.at(sample));
}

double AmplitudeTrajectory::ledger_total(std::size_t sample) const {
  return norm2(sample) + emitted.at(sample) + dissipated.at(sample).total();
}

std::vector<double> OutputRecord::intensity() const {
  std::vector<double> out(f_out.size());
  for (std::size_t i = 0; i < f_out.size(); ++i) out[i] = std::norm(f_out[i]);
  return out;
}

}  // namespace qswitch
