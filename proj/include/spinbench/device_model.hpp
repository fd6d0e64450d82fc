#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace spinbench::device {

using cplx = std::complex<double>;

struct QubitParams {
  int label = 0;                          // 1-based, as printed on the device
  double f_res_mhz = 0.0;
  double drive_efficiency = 0.0;          // Rabi MHz per unit drive amplitude
  double t2_star_us = 10.0;
  double t2_hahn_us = 60.0;
  double rabi_linearity_limit_mhz = 8.0;
};

struct HeatingModel {
  double df_max_khz = 200.0;
  double tau_us = 60.0;
};

/// Microwave-heating shift of the resonance after `elapsed_drive_us` of drive.
double heating_detuning_khz(double elapsed_drive_us, const HeatingModel& model);

struct RegisterOptions {
  // |f_res,i - f_res,j| is clamped to at least this when deriving default
  // Stark coefficients.
  double detuning_floor_mhz = 10.0;
  // Additive constant detuning on a spectator whenever another tone plays.
  double stark_offset_mhz = 0.0;
};

/// Immutable description of the register: per-qubit parameters plus the
/// pairwise couplings induced by sharing one microwave line.
class RegisterModel {
 public:
  using Pair = std::pair<std::size_t, std::size_t>;  // (spectator/target i, driver j), 0-based

  explicit RegisterModel(std::vector<QubitParams> qubits,
                         std::map<Pair, double> stark_overrides = {},
                         std::map<Pair, double> drive_shifts = {},
                         std::map<std::size_t, HeatingModel> heating = {},
                         RegisterOptions options = {});

  std::size_t size() const { return qubits_.size(); }
  const QubitParams& qubit(std::size_t i) const { return qubits_.at(i); }
  const std::vector<QubitParams>& qubits() const { return qubits_; }
  std::size_t index_of_label(int label) const;

  /// kappa_ij [1/MHz]: spectator detuning of i is kappa_ij * (eff_i * V_j)^2
  /// while tone j plays with amplitude V_j.
  double stark_coefficient(std::size_t i, std::size_t j) const;
  double default_stark_coefficient(std::size_t i, std::size_t j) const;
  bool has_stark_override(std::size_t i, std::size_t j) const;

  /// Relative change of qubit i's drive efficiency while tone j also plays.
  double drive_shift(std::size_t i, std::size_t j) const;
  const std::map<Pair, double>& drive_shifts() const { return drive_shifts_; }
  const std::map<Pair, double>& stark_overrides() const { return stark_overrides_; }

  /// Rabi frequency [MHz] produced on qubit i by its own tone at amplitude V,
  /// linear up to the qubit's linearity limit and compressive beyond it.
  double rabi_frequency(std::size_t i, double amplitude, double efficiency_scale = 1.0) const;

  const HeatingModel* heating(std::size_t i) const;
  const std::map<std::size_t, HeatingModel>& heating_models() const { return heating_; }
  const RegisterOptions& options() const { return options_; }

  /// Same register with every Stark coefficient and drive shift zeroed.
  RegisterModel without_crosstalk() const;

 private:
  std::vector<QubitParams> qubits_;
  std::map<Pair, double> stark_overrides_;
  std::map<Pair, double> drive_shifts_;
  std::map<std::size_t, HeatingModel> heating_;
  RegisterOptions options_;
  bool crosstalk_enabled_ = true;
};

/// Element of SU(2) stored as [[a, -conj(b)], [b, conj(a)]].
struct SU2 {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};

  static SU2 identity() { return {}; }
  SU2 operator*(const SU2& rhs) const;
  SU2 adjoint() const { return {std::conj(a), -b}; }
  cplx operator()(int row, int col) const;
};

/// exp(-i 2 pi H dt) for H = beta/2 sz + f_R/2 (cos(phi) sx + sin(phi) sy),
/// frequencies in MHz and dt in ns. Basis order is (down, up).
SU2 step_unitary(double f_rabi_mhz, double phase_rad, double detuning_mhz, double dt_ns);

/// Rotation exp(-i theta/2 sz).
SU2 z_rotation(double theta_rad);

struct QubitState {
  cplx down{1.0, 0.0};
  cplx up{0.0, 0.0};
  double frame_phase = 0.0;   // software-Z offset added to every drive phase
  double frame_mhz = 0.0;     // frequency of this qubit's rotating frame

  void apply(const SU2& u);
  double prob_up() const { return std::norm(up); }
  double norm() const { return std::norm(down) + std::norm(up); }
};

/// Product state of the register; valid because exchange is negligible.
struct SpinState {
  std::vector<QubitState> qubits;
  double elapsed_ns = 0.0;
  double drive_time_ns = 0.0;   // cumulative time with any tone on the line

  /// All qubits down, frames at their resonance frequencies.
  static SpinState ground(const RegisterModel& reg);
};

/// Virtual Z: shifts the phase of all later drives on qubit q. Equivalent to a
/// physical z_rotation(theta) followed by a frame change that leaves
/// Z-basis populations untouched.
void apply_virtual_z(SpinState& state, std::size_t q, double theta_rad);

struct Tone {
  std::size_t qubit = 0;
  double amplitude = 0.0;
  double phase_rad = 0.0;
  double carrier_mhz = 0.0;
};

struct DriveSegment {
  double duration_ns = 0.0;
  std::vector<Tone> tones;
};

/// Per-qubit detuning noise, one value [MHz] per segment.
using NoiseInput = std::vector<std::vector<double>>;

/// Evolves `state` through the segments. Spectators pick up the AC-Stark
/// detuning of every other tone; driven qubits see the drive-efficiency shift
/// of the other tones. `noise` may be empty (noiseless).
SpinState propagate(SpinState state, std::span<const DriveSegment> segments,
                    const RegisterModel& reg, const NoiseInput& noise = {});

/// Segments that play `envelope_steps` (piecewise-constant drive values) as
/// one tone per listed qubit, all in lockstep.
std::vector<DriveSegment> segments_from_steps(std::span<const double> envelope_steps, double dt_ns,
                                              std::span<const Tone> tones);

/// Trace distance between two pure single-qubit states.
double trace_distance(const QubitState& lhs, const QubitState& rhs);

}  // namespace spinbench::device
