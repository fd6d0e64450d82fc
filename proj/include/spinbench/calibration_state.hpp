#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "spinbench/clifford.hpp"
#include "spinbench/device_model.hpp"
#include "spinbench/pulse.hpp"

namespace spinbench {

/// Driven-qubit set as a bit mask over register indices.
using QubitMask = std::uint32_t;

QubitMask mask_of(std::span<const std::size_t> qubits);

/// A V^alpha fit of the crosstalk phase of one pair against driver amplitude.
struct StarkScaling {
  double coefficient = 0.0;
  double exponent = 0.0;
  double sigma_exponent = 0.0;
};

/// Everything the pulse sequencer needs to play calibrated gates. Indexed by
/// register position.
struct CalibrationState {
  double gate_time_ns = 0.0;
  pulse::Shape shape = pulse::Shape::Kaiser;
  double shape_param = pulse::kDefaultKaiserBeta;
  double sample_step_ns = pulse::kDefaultSampleStepNs;

  std::vector<double> carrier_mhz;
  std::vector<double> amplitude;                       // single-qubit peak amplitudes
  std::map<QubitMask, std::vector<double>> simultaneous;  // per driven set
  std::vector<std::vector<double>> dphi;               // rad per cycle, dphi[i][j]
  std::map<std::pair<std::size_t, std::size_t>, StarkScaling> stark_fits;

  std::size_t size() const { return carrier_mhz.size(); }
  pulse::PulseEnvelope envelope() const;

  /// Amplitude of qubit q in a cycle where exactly `driven` play. Without an
  /// entry for that set, the single-qubit amplitude is scaled by the ratio
  /// found in each calibrated pair (q, j) with j driven.
  double amplitude_for(std::size_t q, QubitMask driven) const;
  void set_simultaneous(std::span<const std::size_t> qubits, std::span<const double> amplitudes);

  /// Analytic pi/2 amplitudes and resonant carriers; crosstalk pairs are left
  /// unmeasured (NaN).
  static CalibrationState ideal(const device::RegisterModel& reg, double gate_time_ns,
                                pulse::Shape shape = pulse::Shape::Kaiser,
                                double shape_param = pulse::kDefaultKaiserBeta,
                                double sample_step_ns = pulse::kDefaultSampleStepNs);
};

/// Peak amplitude giving a pi/2 rotation on qubit q with the unit-peak
/// envelope, inverting the register's Rabi response.
double pi_half_amplitude(const device::RegisterModel& reg, std::size_t q, const pulse::PulseEnvelope& unit);

/// Phase offset in front of every cycle of the timetable. The offset of slot
/// i grows after each cycle by the sum of dphi[i][j] over the other qubits j
/// driven in that cycle, whether or not i itself drives. Throws
/// std::invalid_argument (missing-pair-calibration) when a co-driven pair has
/// no entry.
std::vector<std::vector<double>> compile_compensation(const CalibrationState& state,
                                                      const clifford::Timetable& table);

}  // namespace spinbench
