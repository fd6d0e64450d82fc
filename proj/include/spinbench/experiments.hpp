#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinbench/calibration_state.hpp"
#include "spinbench/clifford.hpp"
#include "spinbench/device_model.hpp"
#include "spinbench/fit.hpp"
#include "spinbench/noise.hpp"
#include "spinbench/pulse.hpp"
#include "spinbench/readout.hpp"

namespace spinbench::experiments {

struct PlayOptions {
  bool compensate = true;
  double carrier_offset_mhz = 0.0;
  double idle_ns = 2.0;
  // Rectangular-pulse edge artifact: the first and last edge_samples steps
  // of every pulse play at a random carrier phase.
  std::size_t edge_samples = 0;
  std::uint64_t edge_seed = 0;
};

/// Plays the timetable with the calibrated pulses and returns the final state
/// of every slot. noise[s] may be null (noiseless slot); an empty span means
/// noiseless throughout.
std::vector<device::QubitState> play_timetable(const device::RegisterModel& reg, const CalibrationState& cal,
                                               const clifford::Timetable& table,
                                               std::span<const std::uint8_t> initial_up,
                                               std::span<const noise::SequenceNoise* const> noise,
                                               const PlayOptions& options = {});

/// Number of 1s among `shots` Bernoulli(p) draws, by counting uniforms below
/// p so that equal seeds give outcomes monotone in p.
std::size_t sample_ups(double p, std::size_t shots, std::uint64_t seed);

struct RBConfig {
  std::vector<std::size_t> lengths = default_lengths(11);
  std::size_t randomizations = 35;
  std::size_t shots = 350;
  double gate_time_ns = 125.0;
  pulse::Shape shape = pulse::Shape::Kaiser;
  double shape_param = pulse::kDefaultKaiserBeta;
  double sample_step_ns = pulse::kDefaultSampleStepNs;
  double idle_ns = 2.0;
  std::vector<std::size_t> qubits{0};   // register indices; several -> simultaneous
  std::vector<std::uint8_t> initial_up; // per qubit in `qubits`; empty -> all down
  bool compensate = true;
  double cycle_time_s = noise::ExperimentSchedule::kCycleTimeS;
  bool awg_dead_time = true;
  double carrier_offset_mhz = 0.0;
  std::size_t edge_samples = 0;
  std::optional<double> depolarizing_p0;   // replaces the physical errors
  std::vector<clifford::Axis> interleaved;
  bool tomographic_readout = false;
  readout::ReadoutModel readout;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  static std::vector<std::size_t> default_lengths(int max_exponent);
  void validate() const;
};

struct LengthPoint {
  std::size_t n = 0;
  double mean = 0.0;       // F(n) = P_flip - P_noflip, sign-corrected for the initial state
  double stddev = 0.0;     // across randomizations
  double ci95 = 0.0;       // of the mean
  double mean_flip = 0.0;
  double mean_noflip = 0.0;
  std::vector<double> per_randomization;
};

struct QubitRB {
  std::size_t qubit = 0;
  std::vector<LengthPoint> points;
  fit::DecayFit fit;
  bool fit_ok = false;
  std::string fit_error;
  double clifford_fidelity = 0.0;
  double primitive_fidelity = 0.0;
  double sigma_primitive_fidelity = 0.0;
};

struct RBResult {
  std::vector<QubitRB> qubits;
  double joint_fidelity = 0.0;   // product of primitive fidelities
  noise::BandEdges noise_edges;
  bool all_fits_ok() const;
};

inline constexpr double kPrimitivesPerClifford = 3.25;
double clifford_fidelity(double p);
double primitive_fidelity(double p);

/// Single-qubit or simultaneous RB; configuration decides which.
RBResult run_rb(const RBConfig& config, const device::RegisterModel& reg, const noise::NoiseModel& noise,
                const CalibrationState& cal);
inline RBResult run_srb(const RBConfig& config, const device::RegisterModel& reg,
                        const noise::NoiseModel& noise, const CalibrationState& cal) {
  return run_rb(config, reg, noise, cal);
}

struct InterleavedResult {
  RBResult reference;
  RBResult interleaved;
  double fidelity = 0.0;
  double sigma = 0.0;
};

/// F = (1 + p_int / p_ref) / 2 for the first qubit of the configuration.
double interleaved_fidelity(double p_ref, double p_int);
InterleavedResult run_interleaved(RBConfig config, std::span<const clifford::Axis> word,
                                  const device::RegisterModel& reg, const noise::NoiseModel& noise,
                                  const CalibrationState& cal);

struct SweepPoint {
  double x = 0.0;
  double primitive_fidelity = 0.0;
  double infidelity = 0.0;
  double sigma = 0.0;
  bool fit_ok = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double best_x = 0.0;   // location of the infidelity minimum
};

/// RB of the first configured qubit with the carrier shifted by each offset.
SweepResult detuning_sweep(RBConfig config, std::span<const double> offsets_mhz,
                           const device::RegisterModel& reg, const noise::NoiseModel& noise,
                           const CalibrationState& cal);
/// RB at each gate time with analytically calibrated pulses.
SweepResult gate_time_sweep(RBConfig config, std::span<const double> gate_times_ns,
                            const device::RegisterModel& reg, const noise::NoiseModel& noise);

enum class CoherenceKind { Ramsey, RabiDecay, SpinLock };

struct CoherenceFit {
  double time_us = 0.0;          // T2*, T2^R or T1^rho
  double sigma_time_us = 0.0;
  double quality_factor = 0.0;   // 2 f_R T (driven kinds only)
  double amplitude = 0.0;
  double offset = 0.0;
  std::vector<double> residuals;
};

/// Rabi-decay envelope correction W(t) = (1 + (t / (f_R T2*^2))^2)^(-1/4).
double rabi_envelope_w(double t_us, double f_rabi_mhz, double t2_star_us);

/// Ramsey: A exp(-(t/T)^2) + C. RabiDecay: A exp(-t/T) W(t) + C.
/// SpinLock: A exp(-t/T) + C. Times in us; f_rabi and t2_star only for the
/// driven kinds.
CoherenceFit fit_coherence(CoherenceKind kind, std::span<const double> t_us, std::span<const double> y,
                           double f_rabi_mhz = 0.0, double t2_star_us = 0.0);

}  // namespace spinbench::experiments
