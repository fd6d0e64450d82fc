#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "spinbench/calibration_state.hpp"
#include "spinbench/device_model.hpp"
#include "spinbench/noise.hpp"
#include "spinbench/optimize.hpp"

namespace spinbench::calibration {

/// How simulated calibration measurements are taken. With noise enabled each
/// data point averages `noise_samples` quasi-static detunings drawn from the
/// noise model; shots == 0 returns exact probabilities.
struct MeasurementContext {
  const device::RegisterModel* reg = nullptr;
  std::optional<noise::NoiseModel> noise;
  std::size_t shots = 0;
  std::size_t noise_samples = 16;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  const device::RegisterModel& model() const { return *reg; }
};

struct FrequencyEstimate {
  double f_mhz = 0.0;
  double sigma_mhz = 0.0;
  double rabi_mhz = 0.0;
};

struct SpectroscopyOptions {
  double span_mhz = 10.0;        // sweep covers guess +- span
  std::size_t points = 201;
  double amplitude = 0.0;        // 0 -> f_R of 1 MHz
  double pulse_ns = 500.0;       // pi pulse at 1 MHz
};

/// Rabi line-shape fit P = A f_R^2/(d^2+f_R^2) sin^2(pi t sqrt(d^2+f_R^2)) + B.
FrequencyEstimate calibrate_frequency_coarse(const MeasurementContext& ctx, std::size_t q, double guess_mhz,
                                             const SpectroscopyOptions& options = {});

/// P(f_MW) line shape, also used as the fit model. t in ns.
double spectroscopy_line(double detuning_mhz, double f_rabi_mhz, double t_ns);

struct AmplitudeEstimate {
  double amplitude = 0.0;        // rectangular amplitude for the target f_R
  double measured_rabi_mhz = 0.0;
  double gate_time_ns = 0.0;     // 0.25 / f_target
};

/// Rabi oscillation at probe_amplitude, fit of f_R, rescale to the target.
AmplitudeEstimate calibrate_amplitude_coarse(const MeasurementContext& ctx, std::size_t q, double carrier_mhz,
                                             double target_rabi_mhz, double probe_amplitude = 1.0);

struct RamseyEstimate {
  double carrier_mhz = 0.0;      // corrected
  double fringe_mhz = 0.0;       // fitted f_det
  double t2_star_us = 0.0;
  double contrast = 0.0;
};

/// Ramsey with the carrier deliberately offset by `offset_mhz` below the
/// current estimate; the carrier moves by f_det - offset.
RamseyEstimate calibrate_frequency_fine(const MeasurementContext& ctx, std::size_t q, const CalibrationState& cal,
                                        double offset_mhz = 0.7, double max_wait_us = 4.0,
                                        std::size_t points = 81);

struct FineAmplitude {
  double amplitude = 0.0;
  double check_probability = 0.0;   // P_up after 17 pi/2 at the result
  std::vector<double> sweep;
  std::vector<double> p_plus;       // 16 + 1
  std::vector<double> p_minus;      // 16 + 3
};

/// 16+1 and 16+3 pi/2 sequences over amplitude; both fitted with
/// A cos(kV + phi) + B and intersected.
FineAmplitude calibrate_amplitude_fine(const MeasurementContext& ctx, std::size_t q, const CalibrationState& cal,
                                       double relative_span = 0.04, std::size_t points = 21);

struct CrosstalkMeasurement {
  double dphi = 0.0;            // rad per driver gate
  double sigma = 0.0;
  std::vector<std::size_t> blocks;
  std::vector<double> phases;   // accumulated echo phase per block count
};

/// Hahn echo on `target` with 4N X gates of `driver` in the first arm; the
/// echo phase against N gives the phase per driver gate. N is capped so the
/// total stays within pi/2.
CrosstalkMeasurement measure_crosstalk_phase(const MeasurementContext& ctx, std::size_t target,
                                             std::span<const std::size_t> drivers, const CalibrationState& cal,
                                             std::size_t max_blocks = 8, double driver_scale = 1.0);
inline CrosstalkMeasurement measure_crosstalk_phase(const MeasurementContext& ctx, std::size_t target,
                                                    std::size_t driver, const CalibrationState& cal,
                                                    std::size_t max_blocks = 8, double driver_scale = 1.0) {
  const std::size_t d[1] = {driver};
  return measure_crosstalk_phase(ctx, target, d, cal, max_blocks, driver_scale);
}

/// A V^alpha in log-log space; needs >= 5 points of one sign.
StarkScaling fit_stark_scaling(std::span<const double> amplitudes, std::span<const double> phases);

struct SumCheck {
  double measured = 0.0;
  double predicted = 0.0;   // sum of pairwise phases
  double deviation = 0.0;   // relative
};

SumCheck pairwise_sum_check(const MeasurementContext& ctx, std::size_t target, std::span<const std::size_t> drivers,
                            const CalibrationState& cal);

/// All ordered (target, driver) pairs: N (N - 1) measurements.
std::vector<std::pair<std::size_t, std::size_t>> pairwise_schedule(std::span<const std::size_t> qubits);

/// Fills cal.dphi for every ordered pair of `qubits`.
std::size_t measure_all_pairs(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                              CalibrationState& cal);

/// Sum over the qubits of |P(16+1) - P(16+3)| with all of them driven
/// together at `amplitudes` and compensation active.
double simultaneous_objective(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                              std::span<const double> amplitudes, const CalibrationState& cal,
                              std::uint64_t eval_seed);

struct OptimizeResult {
  optimize::NelderMeadResult search;
  std::vector<double> amplitudes;
};

OptimizeResult optimize_simultaneous_amplitudes(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                                                std::span<const double> initial, CalibrationState& cal,
                                                const optimize::NelderMeadOptions& options = {});

struct SimultaneousReport {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<OptimizeResult> pair_results;
  std::optional<OptimizeResult> full;   // set when more than two qubits
};

/// Amplitude tables for simultaneous drive: every pair first, then the full
/// set starting from the pair-predicted amplitudes.
SimultaneousReport calibrate_simultaneous(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                                          CalibrationState& cal, const optimize::NelderMeadOptions& options = {});

/// kappa_ij that makes one driver gate (single-qubit amplitude of j) shift
/// the spectator i by `dphi` radians under `cal`'s pulse.
double kappa_for_phase(const device::RegisterModel& reg, std::size_t i, std::size_t j, double dphi,
                       const CalibrationState& cal);

struct LadderOptions {
  double gate_time_ns = 250.0;
  std::size_t optimizer_shots = 100000;
  pulse::Shape shape = pulse::Shape::Kaiser;
  double shape_param = pulse::kDefaultKaiserBeta;
  double frequency_guess_offset_mhz = 2.0;   // start this far from f_res
  bool crosstalk = true;
  bool optimize_amplitudes = true;
};

struct LadderReport {
  CalibrationState state;
  std::vector<FrequencyEstimate> coarse;
  std::vector<RamseyEstimate> fine;
  std::size_t pair_measurements = 0;
  std::optional<SimultaneousReport> amplitudes;
};

/// Full ladder: spectroscopy, Rabi, Ramsey, fine amplitude for every qubit,
/// then pairwise crosstalk and the simultaneous amplitude search. With a
/// starting state the coarse steps are seeded from it.
LadderReport run_ladder(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                        const LadderOptions& options, const CalibrationState* start = nullptr);

}  // namespace spinbench::calibration
