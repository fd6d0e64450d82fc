#include "spinbench/calibration_state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spinbench/common.hpp"

namespace spinbench {

QubitMask mask_of(std::span<const std::size_t> qubits) {
  QubitMask m = 0;
  for (std::size_t q : qubits) {
    if (q >= 32) throw std::out_of_range("qubit index too large for a mask");
    m |= QubitMask{1} << q;
  }
  return m;
}

pulse::PulseEnvelope CalibrationState::envelope() const {
  return pulse::make_shape(shape, gate_time_ns, shape_param, sample_step_ns);
}

double CalibrationState::amplitude_for(std::size_t q, QubitMask driven) const {
  if (auto it = simultaneous.find(driven); it != simultaneous.end()) return it->second.at(q);
  double a = amplitude.at(q);
  const QubitMask self = QubitMask{1} << q;
  for (std::size_t j = 0; j < 32; ++j) {
    const QubitMask other = QubitMask{1} << j;
    if (j == q || !(driven & other)) continue;
    if (auto it = simultaneous.find(self | other); it != simultaneous.end()) a *= it->second.at(q) / amplitude.at(q);
  }
  return a;
}

void CalibrationState::set_simultaneous(std::span<const std::size_t> qubits, std::span<const double> amps) {
  if (qubits.size() != amps.size()) throw std::invalid_argument("set_simultaneous: size mismatch");
  std::vector<double> row = amplitude;
  for (std::size_t k = 0; k < qubits.size(); ++k) {
    if (!(amps[k] > 0.0)) throw std::invalid_argument("set_simultaneous: amplitudes must be positive");
    row.at(qubits[k]) = amps[k];
  }
  simultaneous[mask_of(qubits)] = std::move(row);
}

double pi_half_amplitude(const device::RegisterModel& reg, std::size_t q, const pulse::PulseEnvelope& unit) {
  const auto w = unit.step_values();
  const double dt = unit.sample_step_ns();
  auto rotation = [&](double amp) {
    double cycles = 0.0;
    for (double v : w) cycles += reg.rabi_frequency(q, amp * v) * dt * kMhzNs;
    return cycles;
  };
  // pi/2 is a quarter Rabi cycle. Linear guess, then bisection for the
  // compressive regime.
  const double linear = 0.25 / (reg.qubit(q).drive_efficiency * unit.area() * kMhzNs);
  if (std::abs(rotation(linear) - 0.25) < 1e-13) return linear;
  double lo = linear;
  double hi = linear;
  while (rotation(hi) < 0.25) {
    hi *= 2.0;
    if (hi > 1e6 * linear) throw std::runtime_error("pi_half_amplitude: Rabi response saturates below pi/2");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rotation(mid) < 0.25 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CalibrationState CalibrationState::ideal(const device::RegisterModel& reg, double gate_time_ns,
                                         pulse::Shape shape, double shape_param, double sample_step_ns) {
  CalibrationState s;
  s.gate_time_ns = gate_time_ns;
  s.shape = shape;
  s.shape_param = shape_param;
  s.sample_step_ns = sample_step_ns;
  const auto env = s.envelope();
  const std::size_t n = reg.size();
  s.dphi.assign(n, std::vector<double>(n, std::nan("")));
  for (std::size_t q = 0; q < n; ++q) s.dphi[q][q] = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    s.carrier_mhz.push_back(reg.qubit(q).f_res_mhz);
    s.amplitude.push_back(pi_half_amplitude(reg, q, env));
  }
  return s;
}

std::vector<std::vector<double>> compile_compensation(const CalibrationState& state,
                                                      const clifford::Timetable& table) {
  const std::size_t slots = table.slots();
  std::vector<std::vector<double>> offsets(table.cycles(), std::vector<double>(slots, 0.0));
  std::vector<double> acc(slots, 0.0);
  for (std::size_t c = 0; c < table.cycles(); ++c) {
    offsets[c] = acc;
    for (std::size_t i = 0; i < slots; ++i) {
      const auto qi = static_cast<std::size_t>(table.qubits[i]);
      for (std::size_t j = 0; j < slots; ++j) {
        if (j == i || !table.drives(c, j)) continue;
        const auto qj = static_cast<std::size_t>(table.qubits[j]);
        double d = std::nan("");
        if (qi < state.dphi.size() && qj < state.dphi[qi].size()) d = state.dphi[qi][qj];
        if (std::isnan(d)) {
          throw std::invalid_argument("compile_compensation: missing-pair-calibration for (" +
                                      std::to_string(qi) + ", " + std::to_string(qj) + ")");
        }
        acc[i] += d;
      }
    }
  }
  return offsets;
}

}  // namespace spinbench
