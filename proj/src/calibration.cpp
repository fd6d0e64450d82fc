#include "spinbench/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spinbench/common.hpp"
#include "spinbench/experiments.hpp"
#include "spinbench/fit.hpp"
#include "spinbench/parallel.hpp"

namespace spinbench::calibration {

using device::SU2;

namespace {

constexpr double kQuasiStaticUpperHz = 1e5;

SU2 z_evolution(double beta_mhz, double t_ns) {
  const double h = std::numbers::pi * beta_mhz * t_ns * kMhzNs;
  return {device::cplx(std::cos(h), -std::sin(h)), device::cplx(0.0, 0.0)};
}

// Shaped gate in the rotating frame of its own carrier (constant phase).
SU2 shaped_gate(const device::RegisterModel& reg, std::size_t q, std::span<const double> w, double dt,
                double amplitude, double phase, double beta) {
  SU2 g = SU2::identity();
  for (double v : w) g = device::step_unitary(reg.rabi_frequency(q, amplitude * v), 0.0, beta, dt) * g;
  g.b *= std::polar(1.0, phase);
  return g;
}

double prob_up_from_down(const SU2& u) { return std::norm(u.b); }

SU2 power(SU2 u, std::size_t n) {
  SU2 r = SU2::identity();
  while (n > 0) {
    if (n & 1) r = u * r;
    u = u * u;
    n >>= 1;
  }
  return r;
}

// Pre-drawn quasi-static detunings [MHz] for one sweep: draws[slot][point * K + k].
class SweepSampler {
 public:
  SweepSampler(const MeasurementContext& ctx, std::span<const std::size_t> qubits, std::size_t points,
               std::uint64_t tag)
      : ctx_(ctx), slots_(qubits.size()), points_(points), tag_(tag) {
    if (!ctx.reg) throw std::invalid_argument("MeasurementContext: no register");
    noisy_ = ctx.noise && ctx.noise->chi > 0.0;
    k_ = noisy_ ? std::max<std::size_t>(ctx.noise_samples, 1) : 1;
    draws_.assign(slots_, std::vector<double>(points_ * k_, 0.0));
    if (noisy_) {
      const double shots = static_cast<double>(std::max<std::size_t>(ctx.shots, 1000));
      const double cycle = shots * noise::ExperimentSchedule::kCycleTimeS / static_cast<double>(k_);
      for (std::size_t s = 0; s < slots_; ++s) {
        draws_[s] = noise::quasi_static_shots(*ctx.noise, points_ * k_, cycle, kQuasiStaticUpperHz,
                                              derive_seed(ctx.seed, tag, qubits[s]));
      }
    }
  }

  std::size_t samples() const { return k_; }

  // sim(detunings per slot) -> probabilities per slot; averaged, then shot-sampled.
  template <typename Sim>
  std::vector<std::vector<double>> run(Sim&& sim) const {
    std::vector<std::vector<double>> out(points_, std::vector<double>(slots_, 0.0));
    parallel_for(points_, ctx_.workers, [&](std::size_t p) {
      std::vector<double> det(slots_);
      for (std::size_t k = 0; k < k_; ++k) {
        for (std::size_t s = 0; s < slots_; ++s) det[s] = draws_[s][p * k_ + k];
        const auto probs = sim(p, det);
        for (std::size_t s = 0; s < slots_; ++s) out[p][s] += probs[s] / static_cast<double>(k_);
      }
      if (ctx_.shots > 0) {
        for (std::size_t s = 0; s < slots_; ++s) {
          const auto ups = experiments::sample_ups(std::clamp(out[p][s], 0.0, 1.0), ctx_.shots,
                                                   derive_seed(ctx_.seed, tag_, p, s, 0x5348));
          out[p][s] = static_cast<double>(ups) / static_cast<double>(ctx_.shots);
        }
      }
    });
    return out;
  }

 private:
  const MeasurementContext& ctx_;
  std::size_t slots_;
  std::size_t points_;
  std::uint64_t tag_;
  bool noisy_ = false;
  std::size_t k_ = 1;
  std::vector<std::vector<double>> draws_;
};

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t s) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[s]);
  return out;
}

std::uint64_t step_tag(std::uint64_t kind, std::size_t q, std::uint64_t extra = 0) {
  return derive_seed(kind, q, extra);
}

}  // namespace

double spectroscopy_line(double detuning_mhz, double f_rabi_mhz, double t_ns) {
  const double omega2 = detuning_mhz * detuning_mhz + f_rabi_mhz * f_rabi_mhz;
  if (omega2 == 0.0) return 0.0;
  const double s = std::sin(std::numbers::pi * t_ns * kMhzNs * std::sqrt(omega2));
  return f_rabi_mhz * f_rabi_mhz / omega2 * s * s;
}

FrequencyEstimate calibrate_frequency_coarse(const MeasurementContext& ctx, std::size_t q, double guess_mhz,
                                             const SpectroscopyOptions& opt) {
  const auto& reg = ctx.model();
  if (opt.points < 20) throw std::invalid_argument("spectroscopy: need at least 20 points");
  const double amp = opt.amplitude > 0.0 ? opt.amplitude : 1.0 / reg.qubit(q).drive_efficiency;
  const double f_true = reg.qubit(q).f_res_mhz;
  std::vector<double> freqs(opt.points);
  for (std::size_t k = 0; k < opt.points; ++k) {
    freqs[k] = guess_mhz - opt.span_mhz + 2.0 * opt.span_mhz * static_cast<double>(k) /
                                              static_cast<double>(opt.points - 1);
  }
  const std::size_t qs[1] = {q};
  SweepSampler sampler(ctx, qs, opt.points, step_tag(0x5350, q));
  const double f_rabi = reg.rabi_frequency(q, amp);
  const auto rows = sampler.run([&](std::size_t p, std::span<const double> det) {
    const double beta = f_true + det[0] - freqs[p];
    return std::vector<double>{prob_up_from_down(device::step_unitary(f_rabi, 0.0, beta, opt.pulse_ns))};
  });
  const auto y = column(rows, 0);
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo < 0.05) throw FitError("spectroscopy: flat response, no resonance found");

  const std::size_t peak = static_cast<std::size_t>(hi - y.begin());
  // Nominal f_R of the probe; the fit refines it.
  const double fr0 = amp * reg.qubit(q).drive_efficiency;
  Eigen::VectorXd p0(4);
  p0 << *hi - *lo, freqs[peak], fr0, *lo;
  const double t = opt.pulse_ns;
  const fit::ModelFn model = [t](double f, const Eigen::VectorXd& p) {
    return p[0] * spectroscopy_line(p[1] - f, p[2], t) + p[3];
  };
  const auto cf = fit::curve_fit(model, freqs, y, {}, p0);
  FrequencyEstimate out;
  out.f_mhz = cf.params[1];
  out.sigma_mhz = cf.stderr_of(1);
  out.rabi_mhz = std::abs(cf.params[2]);
  if (std::abs(out.f_mhz - guess_mhz) > opt.span_mhz) throw FitError("spectroscopy: resonance outside sweep");
  return out;
}

AmplitudeEstimate calibrate_amplitude_coarse(const MeasurementContext& ctx, std::size_t q, double carrier_mhz,
                                             double target_rabi_mhz, double probe_amplitude) {
  if (!(target_rabi_mhz > 0.0) || !(probe_amplitude > 0.0)) {
    throw std::invalid_argument("calibrate_amplitude_coarse: target and probe must be > 0");
  }
  const auto& reg = ctx.model();
  constexpr std::size_t kPoints = 101;
  constexpr double kMaxNs = 2000.0;
  std::vector<double> t(kPoints);
  for (std::size_t k = 0; k < kPoints; ++k) t[k] = kMaxNs * static_cast<double>(k) / (kPoints - 1);
  const std::size_t qs[1] = {q};
  SweepSampler sampler(ctx, qs, kPoints, step_tag(0x5241, q));
  const double f_rabi = reg.rabi_frequency(q, probe_amplitude);
  const double f_res = reg.qubit(q).f_res_mhz;
  const auto rows = sampler.run([&](std::size_t p, std::span<const double> det) {
    if (t[p] == 0.0) return std::vector<double>{0.0};
    const double beta = f_res + det[0] - carrier_mhz;
    return std::vector<double>{prob_up_from_down(device::step_unitary(f_rabi, 0.0, beta, t[p]))};
  });
  const auto y = column(rows, 0);
  if (*std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end()) < 0.1) {
    throw FitError("Rabi: no oscillation visible");
  }
  // Grid search on f for a robust start, then least squares.
  const double f_nyq = 0.5 * (kPoints - 1) / (kMaxNs * kMhzNs);
  double best_f = 0.0;
  double best_ss = std::numeric_limits<double>::infinity();
  for (double f = 0.05; f < f_nyq; f *= 1.01) {
    double ss = 0.0;
    for (std::size_t k = 0; k < kPoints; ++k) {
      const double s = std::sin(std::numbers::pi * f * t[k] * kMhzNs);
      const double d = s * s - y[k];
      ss += d * d;
    }
    if (ss < best_ss) {
      best_ss = ss;
      best_f = f;
    }
  }
  Eigen::VectorXd p0(3);
  p0 << 1.0, best_f, 0.0;
  const fit::ModelFn model = [](double tn, const Eigen::VectorXd& p) {
    const double s = std::sin(std::numbers::pi * p[1] * tn * kMhzNs);
    return p[0] * s * s + p[2];
  };
  const auto cf = fit::curve_fit(model, t, y, {}, p0);
  AmplitudeEstimate out;
  out.measured_rabi_mhz = std::abs(cf.params[1]);
  if (!(out.measured_rabi_mhz > 0.0)) throw FitError("Rabi: fitted frequency is zero");
  out.amplitude = probe_amplitude * target_rabi_mhz / out.measured_rabi_mhz;
  out.gate_time_ns = 0.25 / target_rabi_mhz / kMhzNs;
  return out;
}

RamseyEstimate calibrate_frequency_fine(const MeasurementContext& ctx, std::size_t q, const CalibrationState& cal,
                                        double offset_mhz, double max_wait_us, std::size_t points) {
  if (points < 20) throw std::invalid_argument("Ramsey: need at least 20 points");
  const auto& reg = ctx.model();
  const auto env = cal.envelope();
  const auto w = env.step_values();
  const double dt = env.sample_step_ns();
  const double carrier = cal.carrier_mhz.at(q) - offset_mhz;
  const double amp = cal.amplitude.at(q);
  std::vector<double> t_us(points);
  for (std::size_t k = 0; k < points; ++k) t_us[k] = max_wait_us * static_cast<double>(k) / (points - 1);
  const std::size_t qs[1] = {q};
  SweepSampler sampler(ctx, qs, points, step_tag(0x5253, q));
  const double f_res = reg.qubit(q).f_res_mhz;
  const auto rows = sampler.run([&](std::size_t p, std::span<const double> det) {
    const double beta = f_res + det[0] - carrier;
    const SU2 g = shaped_gate(reg, q, w, dt, amp, 0.0, beta);
    const SU2 u = g * z_evolution(beta, t_us[p] * 1e3) * g;
    return std::vector<double>{prob_up_from_down(u)};
  });
  const auto y = column(rows, 0);

  // Frequency start from a grid search on a cosine with free phase.
  double best_f = offset_mhz;
  double best_score = -1.0;
  const double f_nyq = 0.5 * (points - 1) / max_wait_us;
  for (double f = 0.05; f < f_nyq; f += 0.002) {
    double c = 0.0, s = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
      c += (y[k] - 0.5) * std::cos(kTwoPi * f * t_us[k]);
      s += (y[k] - 0.5) * std::sin(kTwoPi * f * t_us[k]);
    }
    const double score = c * c + s * s;
    if (score > best_score) {
      best_score = score;
      best_f = f;
    }
  }
  Eigen::VectorXd p0(5);
  const double t2_guess = reg.qubit(q).t2_star_us;
  p0 << 0.5, best_f, 0.0, t2_guess, 0.5;
  const fit::ModelFn model = [](double t, const Eigen::VectorXd& p) {
    return p[0] * std::cos(kTwoPi * p[1] * t + p[2]) * std::exp(-(t / p[3]) * (t / p[3])) + p[4];
  };
  const auto cf = fit::curve_fit(model, t_us, y, {}, p0);
  RamseyEstimate out;
  out.fringe_mhz = std::abs(cf.params[1]);
  out.contrast = std::abs(cf.params[0]);
  out.t2_star_us = std::abs(cf.params[3]);
  if (out.contrast < 0.1) throw FitError("Ramsey: fringe-contrast-too-low");
  out.carrier_mhz = cal.carrier_mhz.at(q) + (out.fringe_mhz - offset_mhz);
  return out;
}

FineAmplitude calibrate_amplitude_fine(const MeasurementContext& ctx, std::size_t q, const CalibrationState& cal,
                                       double relative_span, std::size_t points) {
  if (points < 5) throw std::invalid_argument("fine amplitude: need at least 5 points");
  const auto& reg = ctx.model();
  const auto env = cal.envelope();
  const auto w = env.step_values();
  const double dt = env.sample_step_ns();
  const double v0 = cal.amplitude.at(q);
  const double f_res = reg.qubit(q).f_res_mhz;
  const double carrier = cal.carrier_mhz.at(q);
  FineAmplitude out;
  for (std::size_t k = 0; k < points; ++k) {
    out.sweep.push_back(v0 * (1.0 - relative_span + 2.0 * relative_span * static_cast<double>(k) / (points - 1)));
  }
  auto sequence_probs = [&](double amp, double delta) {
    const double beta = f_res + delta - carrier;
    const SU2 g = z_evolution(beta, 2.0) * shaped_gate(reg, q, w, dt, amp, 0.0, beta);
    const SU2 g16 = power(g, 16);
    return std::pair{prob_up_from_down(g * g16), prob_up_from_down(power(g, 3) * g16)};
  };
  const std::size_t qs[1] = {q};
  SweepSampler plus(ctx, qs, points, step_tag(0x4641, q, 1));
  SweepSampler minus(ctx, qs, points, step_tag(0x4641, q, 3));
  out.p_plus = column(plus.run([&](std::size_t p, std::span<const double> det) {
                        return std::vector<double>{sequence_probs(out.sweep[p], det[0]).first};
                      }),
                      0);
  out.p_minus = column(minus.run([&](std::size_t p, std::span<const double> det) {
                         return std::vector<double>{sequence_probs(out.sweep[p], det[0]).second};
                       }),
                       0);

  const fit::ModelFn model = [](double v, const Eigen::VectorXd& p) { return p[0] * std::cos(p[1] * v + p[2]) + p[3]; };
  auto fit_curve = [&](const std::vector<double>& y, double n_pulses) {
    Eigen::VectorXd p0(4);
    p0 << -0.5, n_pulses * std::numbers::pi / (2.0 * v0), 0.0, 0.5;
    return fit::curve_fit(model, out.sweep, y, {}, p0).params;
  };
  const Eigen::VectorXd a = fit_curve(out.p_plus, 17.0);
  const Eigen::VectorXd b = fit_curve(out.p_minus, 19.0);
  const Eigen::VectorXd pa = a;
  const Eigen::VectorXd pb = b;
  auto diff = [&](double v) { return model(v, pa) - model(v, pb); };

  // Sign change nearest to the starting amplitude.
  const double vmin = out.sweep.front();
  const double vmax = out.sweep.back();
  constexpr int kGrid = 400;
  double best = std::numeric_limits<double>::quiet_NaN();
  double prev_v = vmin;
  double prev_d = diff(vmin);
  for (int k = 1; k <= kGrid; ++k) {
    const double v = vmin + (vmax - vmin) * k / kGrid;
    const double d = diff(v);
    if ((prev_d <= 0.0) != (d <= 0.0)) {
      double lo = prev_v, hi = v, dlo = prev_d;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = diff(mid);
        if ((dlo <= 0.0) == (dm <= 0.0)) {
          lo = mid;
          dlo = dm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (std::isnan(best) || std::abs(root - v0) < std::abs(best - v0)) best = root;
    }
    prev_v = v;
    prev_d = d;
  }
  if (std::isnan(best)) throw FitError("fine amplitude: no-intersection-in-range");
  out.amplitude = best;
  out.check_probability = sequence_probs(best, 0.0).first;
  return out;
}

namespace {

// Hahn echo on slot 0 (target) with the drivers in the first arm.
clifford::Timetable echo_table(std::size_t target, std::span<const std::size_t> drivers, std::size_t blocks,
                               double gate_time_ns, clifford::Axis final_axis) {
  clifford::Timetable t;
  t.gate_time_ns = gate_time_ns;
  t.qubits.push_back(static_cast<int>(target));
  for (std::size_t d : drivers) t.qubits.push_back(static_cast<int>(d));
  const std::size_t slots = t.qubits.size();
  auto row = [&](bool target_plays, clifford::Axis target_axis, bool drivers_play) {
    std::vector<std::int8_t> r(slots, -1);
    if (target_plays) r[0] = static_cast<std::int8_t>(target_axis);
    if (drivers_play) {
      for (std::size_t s = 1; s < slots; ++s) r[s] = static_cast<std::int8_t>(clifford::Axis::X);
    }
    t.gates.push_back(std::move(r));
  };
  row(true, clifford::Axis::X, false);
  for (std::size_t k = 0; k < 4 * blocks; ++k) row(false, clifford::Axis::X, true);
  row(true, clifford::Axis::X, false);
  row(true, clifford::Axis::X, false);
  for (std::size_t k = 0; k < 4 * blocks; ++k) row(false, clifford::Axis::X, false);
  row(true, final_axis, false);
  return t;
}

// Echo phase [rad] for each block count; sign matches the spectator detuning.
std::vector<double> echo_phases(const MeasurementContext& ctx, std::size_t target, std::span<const std::size_t> drivers,
                                const CalibrationState& cal, std::span<const std::size_t> blocks, std::uint64_t tag) {
  std::vector<std::size_t> slots{target};
  slots.insert(slots.end(), drivers.begin(), drivers.end());
  const std::size_t npts = blocks.size();
  SweepSampler sampler(ctx, slots, 2 * npts, tag);
  const auto& reg = ctx.model();
  const auto rows = sampler.run([&](std::size_t p, std::span<const double> det) {
    const std::size_t b = blocks[p / 2];
    const auto axis = p % 2 == 0 ? clifford::Axis::X : clifford::Axis::Y;
    const auto table = echo_table(target, drivers, b, cal.gate_time_ns, axis);
    std::vector<noise::SequenceNoise> nz(det.size());
    std::vector<const noise::SequenceNoise*> ptr;
    for (std::size_t s = 0; s < det.size(); ++s) {
      nz[s].lf_mhz = det[s];
      ptr.push_back(&nz[s]);
    }
    experiments::PlayOptions opt;
    opt.compensate = false;
    const auto st = experiments::play_timetable(reg, cal, table, {}, ptr, opt);
    std::vector<double> out(det.size(), 0.0);
    out[0] = st[0].prob_up();
    return out;
  });
  std::vector<double> phases(npts);
  for (std::size_t k = 0; k < npts; ++k) {
    const double px = rows[2 * k][0];
    const double py = rows[2 * k + 1][0];
    // X-final: P_up = (1 - cos theta)/2; Y-final: P_up = (1 + sin theta)/2.
    phases[k] = std::atan2(2.0 * py - 1.0, 1.0 - 2.0 * px);
  }
  // Unwrap along the block axis.
  for (std::size_t k = 1; k < npts; ++k) {
    while (phases[k] - phases[k - 1] > std::numbers::pi) phases[k] -= kTwoPi;
    while (phases[k] - phases[k - 1] < -std::numbers::pi) phases[k] += kTwoPi;
  }
  return phases;
}

CalibrationState scaled_drivers(const CalibrationState& cal, std::span<const std::size_t> drivers, double scale) {
  CalibrationState c = cal;
  for (std::size_t d : drivers) c.amplitude.at(d) *= scale;
  for (auto& [mask, row] : c.simultaneous) {
    for (std::size_t d : drivers) row.at(d) *= scale;
  }
  return c;
}

}  // namespace

CrosstalkMeasurement measure_crosstalk_phase(const MeasurementContext& ctx, std::size_t target,
                                             std::span<const std::size_t> drivers, const CalibrationState& cal,
                                             std::size_t max_blocks, double driver_scale) {
  if (drivers.empty()) throw std::invalid_argument("measure_crosstalk_phase: no driver");
  for (std::size_t d : drivers) {
    if (d == target) throw std::invalid_argument("measure_crosstalk_phase: driver equals target");
  }
  if (max_blocks < 1) throw std::invalid_argument("measure_crosstalk_phase: need at least one block");
  const CalibrationState c = driver_scale == 1.0 ? cal : scaled_drivers(cal, drivers, driver_scale);
  std::uint64_t tag = derive_seed(0x5854, target, drivers.front(), drivers.size());
  tag = derive_seed(tag, static_cast<std::uint64_t>(driver_scale * 1e6));

  // Coarse probe at N = 1 picks the largest N that stays within pi/2.
  const std::size_t probe_blocks[2] = {0, 1};
  const auto probe = echo_phases(ctx, target, drivers, c, probe_blocks, derive_seed(tag, 1));
  const double estimate = (probe[1] - probe[0]) / 4.0;
  std::size_t n_max = max_blocks;
  if (std::abs(estimate) > 0.0) {
    const double allowed = std::floor(0.5 * std::numbers::pi / (4.0 * std::abs(estimate)));
    if (allowed < 1.0) throw std::runtime_error("measure_crosstalk_phase: phase-wrap even at N = 1");
    n_max = std::min<std::size_t>(n_max, static_cast<std::size_t>(allowed));
  }
  CrosstalkMeasurement m;
  for (std::size_t n = 0; n <= n_max; ++n) m.blocks.push_back(n);
  m.phases = echo_phases(ctx, target, drivers, c, m.blocks, derive_seed(tag, 2));
  std::vector<double> gates;
  for (std::size_t n : m.blocks) gates.push_back(4.0 * static_cast<double>(n));
  const auto line = fit::fit_line(gates, m.phases);
  m.dphi = line.slope;
  m.sigma = line.sigma_slope;
  return m;
}

StarkScaling fit_stark_scaling(std::span<const double> amplitudes, std::span<const double> phases) {
  if (amplitudes.size() != phases.size()) throw std::invalid_argument("fit_stark_scaling: length mismatch");
  if (amplitudes.size() < 5) throw std::invalid_argument("fit_stark_scaling: need at least 5 amplitudes");
  const double sign = phases.front() < 0.0 ? -1.0 : 1.0;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    if (!(amplitudes[k] > 0.0) || !(sign * phases[k] > 0.0)) {
      throw std::invalid_argument("fit_stark_scaling: nonpositive-data");
    }
    lx.push_back(std::log(amplitudes[k]));
    ly.push_back(std::log(sign * phases[k]));
  }
  const auto line = fit::fit_line(lx, ly);
  return {sign * std::exp(line.intercept), line.slope, line.sigma_slope};
}

SumCheck pairwise_sum_check(const MeasurementContext& ctx, std::size_t target, std::span<const std::size_t> drivers,
                            const CalibrationState& cal) {
  SumCheck r;
  for (std::size_t d : drivers) {
    double v = std::nan("");
    if (target < cal.dphi.size() && d < cal.dphi[target].size()) v = cal.dphi[target][d];
    if (std::isnan(v)) v = measure_crosstalk_phase(ctx, target, d, cal).dphi;
    r.predicted += v;
  }
  r.measured = measure_crosstalk_phase(ctx, target, drivers, cal).dphi;
  const double scale = std::max(std::abs(r.predicted), std::abs(r.measured));
  r.deviation = scale > 1e-12 ? std::abs(r.measured - r.predicted) / std::abs(r.predicted == 0.0 ? scale : r.predicted)
                              : 0.0;
  return r;
}

std::vector<std::pair<std::size_t, std::size_t>> pairwise_schedule(std::span<const std::size_t> qubits) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i : qubits) {
    for (std::size_t j : qubits) {
      if (i != j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t measure_all_pairs(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                              CalibrationState& cal) {
  const auto pairs = pairwise_schedule(qubits);
  const std::size_t n = ctx.model().size();
  if (cal.dphi.size() != n) cal.dphi.assign(n, std::vector<double>(n, std::nan("")));
  for (std::size_t i = 0; i < n; ++i) cal.dphi[i][i] = 0.0;
  for (const auto& [i, j] : pairs) cal.dphi[i][j] = measure_crosstalk_phase(ctx, i, j, cal).dphi;
  return pairs.size();
}

double simultaneous_objective(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                              std::span<const double> amplitudes, const CalibrationState& cal,
                              std::uint64_t eval_seed) {
  CalibrationState c = cal;
  c.set_simultaneous(qubits, amplitudes);
  double total = 0.0;
  std::vector<double> p[2];
  for (int variant = 0; variant < 2; ++variant) {
    const std::size_t pulses = variant == 0 ? 17 : 19;
    clifford::Timetable t;
    t.gate_time_ns = c.gate_time_ns;
    for (std::size_t q : qubits) t.qubits.push_back(static_cast<int>(q));
    t.gates.assign(pulses, std::vector<std::int8_t>(qubits.size(), static_cast<std::int8_t>(clifford::Axis::X)));
    MeasurementContext local = ctx;
    local.seed = derive_seed(ctx.seed, eval_seed);
    SweepSampler sampler(local, qubits, 1, derive_seed(0x4f42, variant));
    const auto rows = sampler.run([&](std::size_t, std::span<const double> det) {
      std::vector<noise::SequenceNoise> nz(det.size());
      std::vector<const noise::SequenceNoise*> ptr;
      for (std::size_t s = 0; s < det.size(); ++s) {
        nz[s].lf_mhz = det[s];
        ptr.push_back(&nz[s]);
      }
      const auto st = experiments::play_timetable(ctx.model(), c, t, {}, ptr);
      std::vector<double> out;
      for (const auto& s : st) out.push_back(s.prob_up());
      return out;
    });
    p[variant] = rows[0];
  }
  for (std::size_t s = 0; s < qubits.size(); ++s) total += std::abs(p[0][s] - p[1][s]);
  return total;
}

OptimizeResult optimize_simultaneous_amplitudes(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                                                std::span<const double> initial, CalibrationState& cal,
                                                const optimize::NelderMeadOptions& options) {
  if (qubits.size() != initial.size() || qubits.empty()) {
    throw std::invalid_argument("optimize_simultaneous_amplitudes: one start amplitude per qubit");
  }
  std::uint64_t evals = 0;
  const optimize::Objective f = [&](const std::vector<double>& a) {
    for (double v : a) {
      if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    }
    return simultaneous_objective(ctx, qubits, a, cal, ++evals);
  };
  OptimizeResult r;
  r.search = optimize::nelder_mead(f, std::vector<double>(initial.begin(), initial.end()), options);
  r.amplitudes = r.search.best;
  cal.set_simultaneous(qubits, r.amplitudes);
  return r;
}

SimultaneousReport calibrate_simultaneous(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                                          CalibrationState& cal, const optimize::NelderMeadOptions& options) {
  if (qubits.size() < 2) throw std::invalid_argument("calibrate_simultaneous: need at least two qubits");
  SimultaneousReport rep;
  for (std::size_t a = 0; a < qubits.size(); ++a) {
    for (std::size_t b = a + 1; b < qubits.size(); ++b) {
      const std::size_t pair[2] = {qubits[a], qubits[b]};
      const double init[2] = {cal.amplitude.at(pair[0]), cal.amplitude.at(pair[1])};
      rep.pairs.emplace_back(pair[0], pair[1]);
      rep.pair_results.push_back(optimize_simultaneous_amplitudes(ctx, pair, init, cal, options));
    }
  }
  if (qubits.size() > 2) {
    const QubitMask m = mask_of(qubits);
    std::vector<double> init;
    for (std::size_t q : qubits) init.push_back(cal.amplitude_for(q, m));
    rep.full = optimize_simultaneous_amplitudes(ctx, qubits, init, cal, options);
  }
  return rep;
}

double kappa_for_phase(const device::RegisterModel& reg, std::size_t i, std::size_t j, double dphi,
                       const CalibrationState& cal) {
  const auto env = cal.envelope();
  double w2 = 0.0;
  for (double v : env.step_values()) w2 += v * v;
  const double field = reg.qubit(i).drive_efficiency * cal.amplitude.at(j);
  return dphi / (kTwoPi * kMhzNs * field * field * w2 * env.sample_step_ns());
}

LadderReport run_ladder(const MeasurementContext& ctx, std::span<const std::size_t> qubits,
                        const LadderOptions& options, const CalibrationState* start) {
  const auto& reg = ctx.model();
  LadderReport rep;
  CalibrationState cal = start ? *start
                               : CalibrationState::ideal(reg, options.gate_time_ns, options.shape,
                                                         options.shape_param);
  if (start && std::abs(start->gate_time_ns - options.gate_time_ns) > 1e-9) {
    throw std::invalid_argument("run_ladder: start state has a different gate time");
  }
  const auto env = cal.envelope();
  const double target_rabi = 0.25 / (options.gate_time_ns * kMhzNs);
  for (std::size_t q : qubits) {
    const double guess = start ? start->carrier_mhz.at(q) : reg.qubit(q).f_res_mhz + options.frequency_guess_offset_mhz;
    const auto coarse = calibrate_frequency_coarse(ctx, q, guess);
    rep.coarse.push_back(coarse);
    cal.carrier_mhz.at(q) = coarse.f_mhz;
    const auto rabi = calibrate_amplitude_coarse(ctx, q, coarse.f_mhz, target_rabi);
    // Same pulse area as the rectangular pi/2 of the target Rabi frequency.
    cal.amplitude.at(q) = rabi.amplitude * options.gate_time_ns / env.area();
    const auto fine = calibrate_frequency_fine(ctx, q, cal);
    rep.fine.push_back(fine);
    cal.carrier_mhz.at(q) = fine.carrier_mhz;
    cal.amplitude.at(q) = calibrate_amplitude_fine(ctx, q, cal).amplitude;
  }
  if (qubits.size() > 1 && options.crosstalk) {
    cal.dphi.assign(reg.size(), std::vector<double>(reg.size(), std::nan("")));
    rep.pair_measurements = measure_all_pairs(ctx, qubits, cal);
    if (options.optimize_amplitudes) {
      MeasurementContext opt_ctx = ctx;
      opt_ctx.shots = options.optimizer_shots;
      rep.amplitudes = calibrate_simultaneous(opt_ctx, qubits, cal);
    }
  }
  rep.state = std::move(cal);
  return rep;
}

}  // namespace spinbench::calibration
