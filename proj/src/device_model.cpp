#include "spinbench/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spinbench/common.hpp"

namespace spinbench::device {

double heating_detuning_khz(double elapsed_drive_us, const HeatingModel& model) {
  if (elapsed_drive_us < 0.0) throw std::invalid_argument("heating_detuning: elapsed time < 0");
  if (!(model.tau_us > 0.0)) return elapsed_drive_us > 0.0 ? model.df_max_khz : 0.0;
  return model.df_max_khz * -std::expm1(-elapsed_drive_us / model.tau_us);
}

RegisterModel::RegisterModel(std::vector<QubitParams> qubits, std::map<Pair, double> stark_overrides,
                             std::map<Pair, double> drive_shifts,
                             std::map<std::size_t, HeatingModel> heating, RegisterOptions options)
    : qubits_(std::move(qubits)),
      stark_overrides_(std::move(stark_overrides)),
      drive_shifts_(std::move(drive_shifts)),
      heating_(std::move(heating)),
      options_(options) {
  if (qubits_.empty()) throw std::invalid_argument("RegisterModel: no qubits");
  if (!(options_.detuning_floor_mhz > 0.0)) {
    throw std::invalid_argument("RegisterModel: detuning floor must be > 0");
  }
  for (const auto& q : qubits_) {
    const std::string who = "qubit " + std::to_string(q.label);
    if (!(q.f_res_mhz > 0.0)) throw std::invalid_argument(who + ": f_res must be > 0");
    if (!(q.drive_efficiency > 0.0)) throw std::invalid_argument(who + ": drive_efficiency must be > 0");
    if (q.t2_star_us > q.t2_hahn_us) throw std::invalid_argument(who + ": t2_star exceeds t2_hahn");
    if (!(q.rabi_linearity_limit_mhz > 0.0)) {
      throw std::invalid_argument(who + ": rabi_linearity_limit must be > 0");
    }
  }
  for (const auto& [pair, kappa] : stark_overrides_) {
    const auto [i, j] = pair;
    if (i >= size() || j >= size() || i == j) {
      throw std::invalid_argument("RegisterModel: Stark override refers to an invalid pair");
    }
    if (!std::isfinite(kappa)) throw std::invalid_argument("RegisterModel: Stark override not finite");
    const double dir = qubits_[j].f_res_mhz - qubits_[i].f_res_mhz;
    if (kappa != 0.0 && (kappa > 0.0) != (dir > 0.0)) {
      throw std::invalid_argument("RegisterModel: Stark coefficient sign must follow sign(f_j - f_i)");
    }
  }
  for (const auto& [pair, eta] : drive_shifts_) {
    if (pair.first >= size() || pair.second >= size() || pair.first == pair.second) {
      throw std::invalid_argument("RegisterModel: drive shift refers to an invalid pair");
    }
    if (!(eta > -1.0) || !std::isfinite(eta)) throw std::invalid_argument("RegisterModel: drive shift must be > -1");
  }
  for (const auto& [i, h] : heating_) {
    if (i >= size()) throw std::invalid_argument("RegisterModel: heating model for unknown qubit");
    if (h.tau_us < 0.0) throw std::invalid_argument("RegisterModel: heating tau must be >= 0");
  }
}

std::size_t RegisterModel::index_of_label(int label) const {
  for (std::size_t i = 0; i < qubits_.size(); ++i) {
    if (qubits_[i].label == label) return i;
  }
  throw std::out_of_range("unknown qubit label " + std::to_string(label));
}

double RegisterModel::default_stark_coefficient(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  double delta = qubit(j).f_res_mhz - qubit(i).f_res_mhz;
  if (std::abs(delta) < options_.detuning_floor_mhz) {
    delta = std::copysign(options_.detuning_floor_mhz, delta);
  }
  return 1.0 / (2.0 * delta);
}

bool RegisterModel::has_stark_override(std::size_t i, std::size_t j) const {
  return stark_overrides_.contains({i, j});
}

double RegisterModel::stark_coefficient(std::size_t i, std::size_t j) const {
  if (!crosstalk_enabled_ || i == j) return 0.0;
  if (auto it = stark_overrides_.find({i, j}); it != stark_overrides_.end()) return it->second;
  return default_stark_coefficient(i, j);
}

double RegisterModel::drive_shift(std::size_t i, std::size_t j) const {
  if (!crosstalk_enabled_) return 0.0;
  auto it = drive_shifts_.find({i, j});
  return it == drive_shifts_.end() ? 0.0 : it->second;
}

double RegisterModel::rabi_frequency(std::size_t i, double amplitude, double efficiency_scale) const {
  const auto& q = qubit(i);
  const double linear = q.drive_efficiency * efficiency_scale * amplitude;
  const double limit = q.rabi_linearity_limit_mhz;
  const double mag = std::abs(linear);
  if (mag <= limit) return linear;
  const double excess = mag - limit;
  return std::copysign(limit + excess / (1.0 + excess / limit), linear);
}

const HeatingModel* RegisterModel::heating(std::size_t i) const {
  auto it = heating_.find(i);
  return it == heating_.end() ? nullptr : &it->second;
}

RegisterModel RegisterModel::without_crosstalk() const {
  RegisterModel copy = *this;
  copy.crosstalk_enabled_ = false;
  return copy;
}

SU2 SU2::operator*(const SU2& r) const {
  // [[a, -b*], [b, a*]] * [[c, -d*], [d, c*]]
  return {a * r.a - std::conj(b) * r.b, b * r.a + std::conj(a) * r.b};
}

cplx SU2::operator()(int row, int col) const {
  if (row == 0) return col == 0 ? a : -std::conj(b);
  return col == 0 ? b : std::conj(a);
}

SU2 step_unitary(double f_rabi_mhz, double phase_rad, double detuning_mhz, double dt_ns) {
  const double omega = std::hypot(f_rabi_mhz, detuning_mhz);
  if (omega == 0.0) return SU2::identity();
  const double half_angle = 0.5 * kTwoPi * omega * dt_ns * kMhzNs;
  const double c = std::cos(half_angle);
  const double s = std::sin(half_angle) / omega;
  const double nx = f_rabi_mhz * std::cos(phase_rad);
  const double ny = f_rabi_mhz * std::sin(phase_rad);
  // cos I - i sin (n . sigma)
  return {cplx(c, -s * detuning_mhz), cplx(s * ny, -s * nx)};
}

SU2 z_rotation(double theta_rad) {
  return {cplx(std::cos(0.5 * theta_rad), -std::sin(0.5 * theta_rad)), cplx(0.0, 0.0)};
}

void QubitState::apply(const SU2& u) {
  const cplx d = u.a * down - std::conj(u.b) * up;
  const cplx v = u.b * down + std::conj(u.a) * up;
  down = d;
  up = v;
}

SpinState SpinState::ground(const RegisterModel& reg) {
  SpinState s;
  s.qubits.resize(reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) s.qubits[i].frame_mhz = reg.qubit(i).f_res_mhz;
  return s;
}

void apply_virtual_z(SpinState& state, std::size_t q, double theta_rad) {
  state.qubits.at(q).frame_phase -= theta_rad;
}

SpinState propagate(SpinState state, std::span<const DriveSegment> segments,
                    const RegisterModel& reg, const NoiseInput& noise) {
  const std::size_t n = reg.size();
  if (state.qubits.size() != n) throw std::invalid_argument("propagate: state/register size mismatch");
  if (!noise.empty()) {
    if (noise.size() != n) throw std::invalid_argument("propagate: noise must cover every qubit");
    for (const auto& trace : noise) {
      if (trace.size() < segments.size()) throw std::length_error("propagate: noise trace too short");
    }
  }
  std::vector<const Tone*> own(n);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (!(seg.duration_ns > 0.0)) throw std::invalid_argument("propagate: segment duration must be > 0");
    std::fill(own.begin(), own.end(), nullptr);
    for (const auto& tone : seg.tones) {
      if (tone.qubit >= n) throw std::out_of_range("propagate: tone targets unknown qubit");
      if (own[tone.qubit] != nullptr) {
        throw std::invalid_argument("propagate: more than one tone on a qubit in one segment");
      }
      own[tone.qubit] = &tone;
    }
    const double t_mid = state.elapsed_ns + 0.5 * seg.duration_ns;
    const bool driven = !seg.tones.empty();
    const double drive_mid_us = (state.drive_time_ns + (driven ? 0.5 * seg.duration_ns : 0.0)) * 1e-3;

    for (std::size_t i = 0; i < n; ++i) {
      auto& q = state.qubits[i];
      double beta = reg.qubit(i).f_res_mhz - q.frame_mhz;
      if (!noise.empty()) beta += noise[i][s];
      if (const auto* h = reg.heating(i)) beta += 1e-3 * heating_detuning_khz(drive_mid_us, *h);
      double eff_scale = 1.0;
      bool spectator_of_any = false;
      for (const auto& tone : seg.tones) {
        if (tone.qubit == i) continue;
        const double field = reg.qubit(i).drive_efficiency * tone.amplitude;
        beta += reg.stark_coefficient(i, tone.qubit) * field * field;
        eff_scale += reg.drive_shift(i, tone.qubit);
        spectator_of_any = true;
      }
      if (spectator_of_any) beta += reg.options().stark_offset_mhz;
      double f_rabi = 0.0;
      double phase = 0.0;
      if (const Tone* t = own[i]) {
        f_rabi = reg.rabi_frequency(i, t->amplitude, eff_scale);
        phase = t->phase_rad + q.frame_phase + kTwoPi * (t->carrier_mhz - q.frame_mhz) * t_mid * kMhzNs;
      }
      q.apply(step_unitary(f_rabi, phase, beta, seg.duration_ns));
    }
    state.elapsed_ns += seg.duration_ns;
    if (driven) state.drive_time_ns += seg.duration_ns;
  }
  return state;
}

std::vector<DriveSegment> segments_from_steps(std::span<const double> envelope_steps, double dt_ns,
                                              std::span<const Tone> tones) {
  std::vector<DriveSegment> out(envelope_steps.size());
  for (std::size_t k = 0; k < envelope_steps.size(); ++k) {
    out[k].duration_ns = dt_ns;
    out[k].tones.assign(tones.begin(), tones.end());
    for (auto& t : out[k].tones) t.amplitude *= envelope_steps[k];
  }
  return out;
}

double trace_distance(const QubitState& lhs, const QubitState& rhs) {
  const double overlap = std::norm(std::conj(lhs.down) * rhs.down + std::conj(lhs.up) * rhs.up);
  return std::sqrt(std::max(0.0, 1.0 - overlap));
}

}  // namespace spinbench::device
