#include <gtest/gtest.h>

#include "qswitch/error.hpp"
#include "qswitch/model.hpp"

using namespace qswitch;

namespace {

ScenarioParams two_level() {
  ScenarioParams p;
  p.g_s = 5;
  p.g_q = 20;
  p.delta_q = 2;
  return p;
}

ErrorCode code_of(const ScenarioParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Validate, TwoLevelDefaultsAccepted) { EXPECT_NO_THROW(validate(two_level())); }

TEST(Validate, NegativeCoupling) {
  auto p = two_level();
  p.g_s = -1;
  EXPECT_EQ(code_of(p), ErrorCode::NegativeRate);
}

TEST(Validate, NegativeDecay) {
  auto p = two_level();
  p.gamma_q = -1e-3;
  EXPECT_EQ(code_of(p), ErrorCode::NegativeRate);
}

TEST(Validate, LadderLengths) {
  auto p = two_level();
  p.levels_s = 4;
  p.Omega_s = {5};
  p.delta_s_i = {0, 0};
  EXPECT_EQ(code_of(p), ErrorCode::LengthMismatch);
}

TEST(Validate, LevelCount) {
  auto p = two_level();
  p.levels_s = 1;
  EXPECT_EQ(code_of(p), ErrorCode::InvalidLevelCount);
}

TEST(Validate, KappaSqMustBeOne) {
  auto p = two_level();
  p.kappa_sq = 0;
  EXPECT_EQ(code_of(p), ErrorCode::NonPositiveKappaSq);
  p.kappa_sq = 2;
  EXPECT_EQ(code_of(p), ErrorCode::UnitConflict);
}

TEST(Validate, NonFinite) {
  auto p = two_level();
  p.Delta_q = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(code_of(p), ErrorCode::NonFiniteValue);
}

TEST(Validate, Idempotent) {
  const auto p = two_level();
  const auto copy = p;
  validate(p);
  validate(p);
  EXPECT_EQ(p, copy);
}

TEST(Basis, TwoLevelOrder) {
  const auto b = basis(two_level());
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(to_string(b[0]), "PhotonS");
  EXPECT_EQ(to_string(b[1]), "AtomS1");
  EXPECT_EQ(to_string(b[2]), "PhotonQ");
  EXPECT_EQ(to_string(b[3]), "AtomQ");
  EXPECT_EQ(photon_q_index(two_level()), 2u);
  EXPECT_EQ(atom_q_index(two_level()), 3u);
}

TEST(Basis, LadderDimensions) {
  auto p = two_level();
  p.levels_s = 3;
  p.Omega_s = {4.94};
  p.delta_s_i = {0};
  EXPECT_EQ(basis(p).size(), 5u);
  EXPECT_EQ(manifold_dimension(p), 5u);
  p.levels_s = 4;
  p.Omega_s = {5, 5};
  p.delta_s_i = {0, 0};
  const auto b = basis(p);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(b[3].kind, BasisLabel::Kind::AtomS);
  EXPECT_EQ(b[3].rung, 3);
  EXPECT_EQ(b[4].kind, BasisLabel::Kind::PhotonQ);
}

TEST(Basis, StableAcrossCalls) { EXPECT_EQ(basis(two_level()), basis(two_level())); }

TEST(Ledger, TotalsAddUp) {
  AmplitudeTrajectory tr;
  tr.times = {0.0};
  tr.amplitudes = {{Complex(0.6, 0), Complex(0, 0.3), Complex(0, 0), Complex(0.1, 0.1)}};
  tr.emitted = {0.2};
  tr.dissipated = {LossLedger{0.01, 0.0, 0.02, 0.0}};
  const double n2 = 0.36 + 0.09 + 0.02;
  EXPECT_DOUBLE_EQ(tr.norm2(0), n2);
  EXPECT_DOUBLE_EQ(tr.ledger_total(0), n2 + 0.2 + 0.03);
}

TEST(OutputRecord, Intensity) {
  OutputRecord r;
  r.times = {0, 1};
  r.f_in = {0, 0};
  r.f_out = {Complex(3, 4), Complex(0, -1)};
  const auto I = r.intensity();
  EXPECT_DOUBLE_EQ(I[0], 25.0);
  EXPECT_DOUBLE_EQ(I[1], 1.0);
}
