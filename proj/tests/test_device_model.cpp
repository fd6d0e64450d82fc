#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <gtest/gtest.h>

#include "spinbench/common.hpp"
#include "spinbench/device_model.hpp"

using namespace spinbench;
using namespace spinbench::device;
using cd = std::complex<double>;

namespace {

// Dense exp(-i 2 pi H dt) with sigma matrices in (down, up) order.
Eigen::Matrix2cd expm_oracle(double f, double phi, double beta, double dt_ns) {
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, cd(0, -1), cd(0, 1), 0;
  sz << 1, 0, 0, -1;
  const Eigen::Matrix2cd h = 0.5 * beta * sz + 0.5 * f * (std::cos(phi) * sx + std::sin(phi) * sy);
  const Eigen::Matrix2cd m = cd(0, -kTwoPi * dt_ns * 1e-3) * h;
  return m.exp();
}

RegisterModel pair_register() {
  return RegisterModel({{1, 16473.5, 2.0, 10.0, 60.0, 8.0}, {2, 16623.5, 1.0, 10.0, 60.0, 8.0}});
}

}  // namespace

TEST(StepUnitary, MatchesMatrixExponential) {
  const double cases[][4] = {{1.0, 0.0, 0.0, 10.0}, {2.0, 0.7, 0.3, 3.0}, {0.0, 0.0, 1.5, 7.0},
                             {5.0, -2.1, -0.8, 0.5}, {0.3, 1.57, 4.0, 125.0}};
  for (const auto& c : cases) {
    const SU2 u = step_unitary(c[0], c[1], c[2], c[3]);
    const auto m = expm_oracle(c[0], c[1], c[2], c[3]);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) EXPECT_LT(std::abs(u(r, k) - m(r, k)), 1e-12);
    }
  }
}

TEST(StepUnitary, ResonantRabiFormula) {
  // P_up = sin^2(pi f t) from the ground state.
  for (double t : {10.0, 62.5, 125.0, 200.0}) {
    QubitState s;
    s.apply(step_unitary(2.0, 0.0, 0.0, t));
    EXPECT_NEAR(s.prob_up(), std::pow(std::sin(std::numbers::pi * 2.0 * t * 1e-3), 2), 1e-12);
  }
}

TEST(StepUnitary, DetunedRabiFormula) {
  const double f = 1.0;
  const double d = 0.6;
  const double t = 400.0;
  QubitState s;
  s.apply(step_unitary(f, 0.3, d, t));
  const double w = std::hypot(f, d);
  const double oracle = f * f / (w * w) * std::pow(std::sin(std::numbers::pi * w * t * 1e-3), 2);
  EXPECT_NEAR(s.prob_up(), oracle, 1e-12);
}

TEST(StepUnitary, ComposesOverTime) {
  const SU2 a = step_unitary(1.3, 0.4, 0.2, 30.0);
  const SU2 b = step_unitary(1.3, 0.4, 0.2, 20.0);
  const SU2 ab = step_unitary(1.3, 0.4, 0.2, 50.0);
  const SU2 p = b * a;
  EXPECT_LT(std::abs(p.a - ab.a) + std::abs(p.b - ab.b), 1e-12);
  EXPECT_NEAR(std::norm(ab.a) + std::norm(ab.b), 1.0, 1e-14);
}

TEST(ZRotation, EqualsPureDetuningStep) {
  const SU2 z = z_rotation(kTwoPi * 0.5 * 40.0 * 1e-3);
  const SU2 s = step_unitary(0.0, 0.0, 0.5, 40.0);
  EXPECT_LT(std::abs(z.a - s.a) + std::abs(z.b - s.b), 1e-12);
}

TEST(Heating, ExponentialModel) {
  const HeatingModel h{200.0, 60.0};
  EXPECT_DOUBLE_EQ(heating_detuning_khz(0.0, h), 0.0);
  EXPECT_NEAR(heating_detuning_khz(60.0, h), 200.0 * (1.0 - std::exp(-1.0)), 1e-9);
  EXPECT_NEAR(heating_detuning_khz(60.0, h), 126.4, 0.05);
  EXPECT_NEAR(heating_detuning_khz(1e6, h), 200.0, 1e-9);
  EXPECT_THROW(heating_detuning_khz(-1.0, h), std::invalid_argument);
}

TEST(Register, DefaultStarkCoefficientAndSign) {
  const auto reg = pair_register();
  EXPECT_NEAR(reg.stark_coefficient(0, 1), 1.0 / (2.0 * 150.0), 1e-15);
  EXPECT_NEAR(reg.stark_coefficient(1, 0), -1.0 / (2.0 * 150.0), 1e-15);
  EXPECT_EQ(reg.stark_coefficient(0, 0), 0.0);
  EXPECT_EQ(reg.without_crosstalk().stark_coefficient(0, 1), 0.0);
}

TEST(Register, DetuningFloorKeepsCoefficientFinite) {
  RegisterOptions opt;
  opt.detuning_floor_mhz = 10.0;
  const RegisterModel reg({{1, 1000.0, 1.0, 10, 60, 8}, {2, 1000.0 + 1e-9, 1.0, 10, 60, 8}}, {}, {}, {}, opt);
  EXPECT_NEAR(reg.stark_coefficient(0, 1), 1.0 / 20.0, 1e-12);
}

TEST(Register, RejectsInvariantViolations) {
  EXPECT_THROW(RegisterModel({}), std::invalid_argument);
  EXPECT_THROW(RegisterModel({{1, -1.0, 1.0, 10, 60, 8}}), std::invalid_argument);
  EXPECT_THROW(RegisterModel({{1, 100.0, 0.0, 10, 60, 8}}), std::invalid_argument);
  EXPECT_THROW(RegisterModel({{1, 100.0, 1.0, 70, 60, 8}}), std::invalid_argument);
  // kappa sign must follow f_j - f_i.
  EXPECT_THROW(RegisterModel({{1, 100.0, 1.0, 10, 60, 8}, {2, 200.0, 1.0, 10, 60, 8}}, {{{0, 1}, -0.01}}),
               std::invalid_argument);
}

TEST(Register, LabelsAndLinearity) {
  const auto reg = pair_register();
  EXPECT_EQ(reg.index_of_label(2), 1u);
  EXPECT_THROW(reg.index_of_label(7), std::out_of_range);
  EXPECT_DOUBLE_EQ(reg.rabi_frequency(0, 2.0), 4.0);
  const double hi = reg.rabi_frequency(0, 10.0);
  EXPECT_LT(hi, 20.0);
  EXPECT_GT(hi, 8.0);
}

TEST(Propagate, SpectatorPhaseSignFollowsFrequencyOrder) {
  const auto reg = pair_register();
  for (std::size_t driver : {1u, 0u}) {
    const std::size_t spectator = 1 - driver;
    auto st = SpinState::ground(reg);
    st.qubits[spectator].apply(step_unitary(1.0, 0.0, 0.0, 125.0));   // pi/2 about x
    const double v = 0.5;
    const std::vector<DriveSegment> segs{{100.0, {{driver, v, 0.0, reg.qubit(driver).f_res_mhz}}}};
    const auto out = propagate(st, segs, reg);
    const auto& q0 = st.qubits[spectator];
    const auto& q1 = out.qubits[spectator];
    const double phase = std::arg(q1.up * std::conj(q1.down)) - std::arg(q0.up * std::conj(q0.down));
    const double field = reg.qubit(spectator).drive_efficiency * v;
    const double expected = kTwoPi * reg.stark_coefficient(spectator, driver) * field * field * 100.0 * 1e-3;
    const double sign = reg.qubit(driver).f_res_mhz > reg.qubit(spectator).f_res_mhz ? 1.0 : -1.0;
    EXPECT_GT(sign * phase, 0.0);
    EXPECT_NEAR(phase, expected, 1e-12);
    EXPECT_NEAR(q1.prob_up(), q0.prob_up(), 1e-12);
  }
}

TEST(Propagate, SegmentsFromStepsPlaysPiPulse) {
  const auto reg = pair_register();
  const std::vector<double> steps(250, 1.0);
  const Tone tone{0, 0.5, 0.0, reg.qubit(0).f_res_mhz};
  const auto segs = segments_from_steps(steps, 0.5, std::span(&tone, 1));
  const auto out = propagate(SpinState::ground(reg), segs, reg.without_crosstalk());
  // f_R = 1 MHz for 125 ns -> pi/4 rotation angle... P = sin^2(pi * 0.125).
  EXPECT_NEAR(out.qubits[0].prob_up(), std::pow(std::sin(std::numbers::pi * 0.125), 2), 1e-12);
  EXPECT_NEAR(out.qubits[1].prob_up(), 0.0, 1e-12);
}

TEST(Propagate, RejectsBadInput) {
  const auto reg = pair_register();
  const std::vector<DriveSegment> bad{{0.0, {}}};
  EXPECT_THROW(propagate(SpinState::ground(reg), bad, reg), std::invalid_argument);
  const std::vector<DriveSegment> twice{{1.0, {{0, 1.0, 0.0, 0.0}, {0, 1.0, 0.0, 0.0}}}};
  EXPECT_THROW(propagate(SpinState::ground(reg), twice, reg), std::invalid_argument);
}

TEST(VirtualZ, MatchesPhysicalRotationBeforeNextPulse) {
  const auto reg = pair_register().without_crosstalk();
  auto st = SpinState::ground(reg);
  st.qubits[0].apply(step_unitary(1.0, 0.0, 0.0, 100.0));
  const double theta = 1.1;
  const std::vector<DriveSegment> pulse{{80.0, {{0, 0.5, 0.0, reg.qubit(0).f_res_mhz}}}};

  auto virt = st;
  apply_virtual_z(virt, 0, theta);
  EXPECT_NEAR(virt.qubits[0].prob_up(), st.qubits[0].prob_up(), 1e-14);
  virt = propagate(virt, pulse, reg);

  auto phys = st;
  phys.qubits[0].apply(z_rotation(theta));
  phys = propagate(phys, pulse, reg);
  EXPECT_NEAR(virt.qubits[0].prob_up(), phys.qubits[0].prob_up(), 1e-12);
}

TEST(TraceDistance, PureStates) {
  QubitState a, b;
  EXPECT_NEAR(trace_distance(a, b), 0.0, 1e-15);
  b.down = 0.0;
  b.up = 1.0;
  EXPECT_NEAR(trace_distance(a, b), 1.0, 1e-15);
}
