#include "spinbench/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "spinbench/common.hpp"
#include "spinbench/parallel.hpp"

namespace spinbench::experiments {

using device::SU2;

namespace {

constexpr std::uint64_t kTagSequence = 0x5345;
constexpr std::uint64_t kTagShots = 0x5348;
constexpr std::uint64_t kTagNoise = 0x4e4f;
constexpr std::uint64_t kTagEdge = 0x4544;

SU2 z_evolution(double beta_cycles) {
  // exp(-i pi beta_cycles sz): beta integrated over time, in cycles.
  const double h = std::numbers::pi * beta_cycles;
  return {device::cplx(std::cos(h), -std::sin(h)), device::cplx(0.0, 0.0)};
}

// Drive set of one cycle: which slots play, and the amplitude each plays at.
struct CycleDrive {
  QubitMask mask = 0;
  std::vector<double> amplitude;   // per slot, 0 when idle
};

}  // namespace

std::vector<device::QubitState> play_timetable(const device::RegisterModel& reg, const CalibrationState& cal,
                                               const clifford::Timetable& table,
                                               std::span<const std::uint8_t> initial_up,
                                               std::span<const noise::SequenceNoise* const> noise,
                                               const PlayOptions& options) {
  const std::size_t slots = table.slots();
  if (!initial_up.empty() && initial_up.size() != slots) {
    throw std::invalid_argument("play_timetable: initial state size mismatch");
  }
  if (!noise.empty() && noise.size() != slots) throw std::invalid_argument("play_timetable: noise size mismatch");
  if (std::abs(table.gate_time_ns - cal.gate_time_ns) > 1e-9) {
    throw std::invalid_argument("play_timetable: timetable and calibration gate times differ");
  }
  std::vector<std::size_t> qidx(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    if (table.qubits[s] < 0 || static_cast<std::size_t>(table.qubits[s]) >= reg.size()) {
      throw std::out_of_range("play_timetable: unknown qubit");
    }
    qidx[s] = static_cast<std::size_t>(table.qubits[s]);
  }
  for (std::size_t s = 0; s < noise.size(); ++s) {
    if (noise[s] && !noise[s]->if_mhz.empty() && noise[s]->if_mhz.size() < table.cycles()) {
      throw std::length_error("play_timetable: noise trace too short");
    }
  }

  const auto env = cal.envelope();
  const auto w = env.step_values();
  const double dt = env.sample_step_ns();
  const double tg = cal.gate_time_ns;
  const double idle = options.idle_ns;
  double w2_sum = 0.0;
  for (double v : w) w2_sum += v * v;

  std::vector<std::vector<double>> comp;
  if (options.compensate) comp = compile_compensation(cal, table);

  // Amplitudes per distinct drive set.
  std::vector<CycleDrive> drives(table.cycles());
  std::map<QubitMask, std::vector<double>> amp_cache;
  for (std::size_t c = 0; c < table.cycles(); ++c) {
    QubitMask m = 0;
    for (std::size_t s = 0; s < slots; ++s) {
      if (table.drives(c, s)) m |= QubitMask{1} << qidx[s];
    }
    auto it = amp_cache.find(m);
    if (it == amp_cache.end()) {
      std::vector<double> amps(slots, 0.0);
      for (std::size_t s = 0; s < slots; ++s) {
        if (m & (QubitMask{1} << qidx[s])) amps[s] = cal.amplitude_for(qidx[s], m);
      }
      it = amp_cache.emplace(m, std::move(amps)).first;
    }
    drives[c].mask = m;
    drives[c].amplitude = it->second;
  }

  const bool plain_phase = options.edge_samples == 0;
  std::vector<device::QubitState> out(slots);
  for (std::size_t s = 0; s < slots; ++s) {
    const std::size_t q = qidx[s];
    const auto& qp = reg.qubit(q);
    const auto* heat = reg.heating(q);
    const noise::SequenceNoise* nz = noise.empty() ? nullptr : noise[s];
    device::QubitState st;
    st.frame_mhz = qp.f_res_mhz;
    if (!initial_up.empty() && initial_up[s]) {
      st.down = 0.0;
      st.up = 1.0;
    }
    std::mt19937_64 edge_rng(derive_seed(options.edge_seed, kTagEdge, s));
    std::uniform_real_distribution<double> edge_phase(0.0, kTwoPi);
    double t_ns = 0.0;
    double drive_ns = 0.0;
    const double carrier_detuning = cal.carrier_mhz.at(q) + options.carrier_offset_mhz - qp.f_res_mhz;

    for (std::size_t c = 0; c < table.cycles(); ++c) {
      const auto& cd = drives[c];
      double stark = 0.0;
      double eff_scale = 1.0;
      bool spectator = false;
      for (std::size_t j = 0; j < slots; ++j) {
        if (j == s || cd.amplitude[j] == 0.0) continue;
        const double field = qp.drive_efficiency * cd.amplitude[j];
        stark += reg.stark_coefficient(q, qidx[j]) * field * field;
        eff_scale += reg.drive_shift(q, qidx[j]);
        spectator = true;
      }
      const double constant = spectator ? reg.options().stark_offset_mhz : 0.0;
      const double slow = nz ? nz->slow(c) : 0.0;
      const bool any_drive = cd.mask != 0;
      const bool hf = nz && !nz->hf_mhz.empty();
      const bool own = table.drives(c, s);

      if (!own) {
        // Pure z evolution commutes with itself, so only the integral matters.
        double cycles_int = (slow + constant) * tg + stark * w2_sum * dt;
        if (hf) {
          for (std::size_t k = 0; k < w.size(); ++k) cycles_int += nz->at(c, (k + 0.5) * dt) * dt;
        }
        if (heat) {
          for (std::size_t k = 0; k < w.size(); ++k) {
            const double mid_us = (drive_ns + (any_drive ? (k + 0.5) * dt : 0.0)) * 1e-3;
            cycles_int += 1e-3 * device::heating_detuning_khz(mid_us, *heat) * dt;
          }
        }
        st.apply(z_evolution(cycles_int * kMhzNs));
      } else {
        const double amp = cd.amplitude[s];
        double phase0 = clifford::axis_phase(static_cast<clifford::Axis>(table.gates[c][s]));
        if (!comp.empty()) phase0 += comp[c][s];
        double edge_a = 0.0;
        double edge_b = 0.0;
        if (options.edge_samples > 0) {
          edge_a = edge_phase(edge_rng);
          edge_b = edge_phase(edge_rng);
        }
        SU2 g = SU2::identity();
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double tk = (k + 0.5) * dt;
          double beta = slow + constant + stark * w[k] * w[k];
          if (hf) beta += nz->at(c, tk);
          if (heat) beta += 1e-3 * device::heating_detuning_khz((drive_ns + tk) * 1e-3, *heat);
          const double f = reg.rabi_frequency(q, amp * w[k], eff_scale);
          double phi = 0.0;
          if (!plain_phase) {
            phi = phase0 + kTwoPi * carrier_detuning * (t_ns + tk) * kMhzNs;
            if (k < options.edge_samples) phi += edge_a;
            if (k + options.edge_samples >= w.size()) phi += edge_b;
          } else if (carrier_detuning != 0.0) {
            phi = kTwoPi * carrier_detuning * (t_ns + tk) * kMhzNs;
          }
          g = device::step_unitary(f, phi, beta, dt) * g;
        }
        if (plain_phase) {
          // Constant drive phase: conjugate the phase-free product by Rz(phase0).
          g.b *= std::polar(1.0, phase0);
        }
        st.apply(g);
      }
      if (any_drive) drive_ns += tg;
      t_ns += tg;
      // Inter-gate idle: no tones, noise and heating drift continue.
      if (idle > 0.0) {
        double beta = slow;
        if (hf) beta += nz->at(c, tg);
        if (heat) beta += 1e-3 * device::heating_detuning_khz(drive_ns * 1e-3, *heat);
        st.apply(z_evolution(beta * idle * kMhzNs));
      }
      t_ns += idle;
    }
    out[s] = st;
  }
  return out;
}

std::size_t sample_ups(double p, std::size_t shots, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < shots; ++i) k += u(rng) < p ? 1 : 0;
  return k;
}

std::vector<std::size_t> RBConfig::default_lengths(int max_exponent) {
  std::vector<std::size_t> out;
  for (int e = 0; e <= max_exponent; ++e) out.push_back(std::size_t{1} << e);
  return out;
}

void RBConfig::validate() const {
  if (lengths.empty()) throw std::invalid_argument("RBConfig: no lengths");
  if (!std::is_sorted(lengths.begin(), lengths.end()) || lengths.front() < 1) {
    throw std::invalid_argument("RBConfig: lengths must be ascending and >= 1");
  }
  if (randomizations < 2) throw std::invalid_argument("RBConfig: need at least two randomizations");
  if (shots < 1) throw std::invalid_argument("RBConfig: shots must be >= 1");
  if (!(gate_time_ns > 0.0)) throw std::invalid_argument("RBConfig: gate_time must be > 0");
  if (qubits.empty()) throw std::invalid_argument("RBConfig: no qubits");
  if (!initial_up.empty() && initial_up.size() != qubits.size()) {
    throw std::invalid_argument("RBConfig: initial_up must match qubits");
  }
  if (depolarizing_p0 && !(*depolarizing_p0 > 0.0 && *depolarizing_p0 <= 1.0)) {
    throw std::invalid_argument("RBConfig: depolarizing p0 must lie in (0, 1]");
  }
  if (tomographic_readout) {
    std::vector<std::size_t> sorted = qubits;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::vector<std::size_t>{0, 1, 2, 3, 4}) {
      throw std::invalid_argument("RBConfig: tomographic readout needs all five qubits");
    }
  }
  readout.validate();
}

bool RBResult::all_fits_ok() const {
  return std::all_of(qubits.begin(), qubits.end(), [](const QubitRB& q) { return q.fit_ok; });
}

double clifford_fidelity(double p) { return 0.5 * (1.0 + p); }
double primitive_fidelity(double p) { return 1.0 - (1.0 - clifford_fidelity(p)) / kPrimitivesPerClifford; }

namespace {

struct Task {
  std::size_t r = 0;
  std::size_t li = 0;
  clifford::Outcome outcome = clifford::Outcome::Identity;
  std::size_t schedule_index = 0;
};

// Per-slot measured up-probability for one sequence.
std::vector<double> measure(const RBConfig& cfg, std::span<const double> p_up, std::uint64_t seed) {
  const std::size_t slots = p_up.size();
  std::vector<double> out(slots);
  if (!cfg.tomographic_readout) {
    for (std::size_t s = 0; s < slots; ++s) {
      const auto ups = sample_ups(p_up[s], cfg.shots, derive_seed(seed, s));
      out[s] = static_cast<double>(ups) / static_cast<double>(cfg.shots);
    }
    return out;
  }
  // Five-qubit cycle: tomographic ZZ/ZI on pairs (0,1) and (3,4), QND on 2.
  std::vector<std::size_t> slot_of(5);
  for (std::size_t s = 0; s < slots; ++s) slot_of[cfg.qubits[s]] = s;
  auto pair = [&](std::size_t a, std::size_t b, std::uint64_t tag) {
    std::mt19937_64 rng(derive_seed(seed, tag));
    const auto shots =
        readout::tomographic_shots(p_up[slot_of[a]], p_up[slot_of[b]], cfg.shots, cfg.readout, rng);
    const auto rec = readout::tomographic_reconstruct(shots, cfg.readout.threshold);
    out[slot_of[a]] = rec.p1_up;
    out[slot_of[b]] = rec.p2_up;
  };
  pair(0, 1, 100);
  pair(3, 4, 101);
  std::mt19937_64 rng(derive_seed(seed, 102));
  std::size_t ups = 0;
  for (std::size_t k = 0; k < cfg.shots; ++k) {
    ups += readout::qnd_readout_q3(p_up[slot_of[2]], cfg.readout, rng, 1).first_read_up ? 1 : 0;
  }
  out[slot_of[2]] = static_cast<double>(ups) / static_cast<double>(cfg.shots);
  return out;
}

}  // namespace

RBResult run_rb(const RBConfig& cfg, const device::RegisterModel& reg, const noise::NoiseModel& noise_model,
                const CalibrationState& cal) {
  cfg.validate();
  if (std::abs(cal.gate_time_ns - cfg.gate_time_ns) > 1e-9 || cal.shape != cfg.shape ||
      cal.shape_param != cfg.shape_param || cal.sample_step_ns != cfg.sample_step_ns) {
    throw std::invalid_argument("run_rb: calibration does not match the configured pulse");
  }
  const std::size_t slots = cfg.qubits.size();
  const std::size_t n_len = cfg.lengths.size();

  // Sequences first: their cycle counts define the wall-clock schedule.
  std::vector<Task> tasks;
  std::vector<clifford::Timetable> tables;
  noise::ExperimentSchedule schedule;
  for (std::size_t r = 0; r < cfg.randomizations; ++r) {
    if (cfg.awg_dead_time) schedule.add_dead_time(noise::ExperimentSchedule::kAwgLoadS);
    for (std::size_t li = 0; li < n_len; ++li) {
      std::vector<clifford::CliffordSequence> base;
      for (std::size_t s = 0; s < slots; ++s) {
        std::mt19937_64 rng(derive_seed(cfg.seed, kTagSequence, r, li, cfg.qubits[s]));
        auto seq = clifford::random_sequence(cfg.lengths[li], rng, clifford::Outcome::Identity,
                                             static_cast<int>(cfg.qubits[s]), cfg.gate_time_ns);
        if (!cfg.interleaved.empty()) seq = clifford::interleave(std::move(seq), cfg.interleaved);
        base.push_back(std::move(seq));
      }
      for (auto outcome : {clifford::Outcome::Identity, clifford::Outcome::Flip}) {
        auto seqs = base;
        for (auto& s : seqs) {
          s.outcome = outcome;
          clifford::assign_recovery(s);
        }
        tables.push_back(clifford::schedule_simultaneous(seqs));
        schedule.add_sequence(tables.back().cycles(), cfg.gate_time_ns, cfg.shots, cfg.cycle_time_s,
                              cfg.idle_ns);
        tasks.push_back({r, li, outcome, tasks.size()});
      }
    }
  }

  const bool noisy = noise_model.chi > 0.0 && !cfg.depolarizing_p0 &&
                     (noise_model.lf_enabled || noise_model.if_enabled || noise_model.hf_enabled);
  std::vector<std::optional<noise::NoiseSynthesizer>> synth(slots);
  RBResult result;
  if (noisy) {
    for (std::size_t s = 0; s < slots; ++s) {
      noise::NoiseModel m = noise_model;
      m.seed = derive_seed(noise_model.seed, kTagNoise, cfg.qubits[s]);
      synth[s].emplace(m, schedule);
    }
    result.noise_edges = synth[0]->edges();
  }

  // measured[task][slot]
  std::vector<std::vector<double>> measured(tasks.size());
  PlayOptions play;
  play.compensate = cfg.compensate;
  play.carrier_offset_mhz = cfg.carrier_offset_mhz;
  play.idle_ns = cfg.idle_ns;
  play.edge_samples = cfg.edge_samples;
  std::vector<std::uint8_t> init = cfg.initial_up;
  if (init.empty()) init.assign(slots, 0);

  parallel_for(tasks.size(), cfg.workers, [&](std::size_t k) {
    const auto& task = tasks[k];
    const auto& table = tables[k];
    std::vector<noise::SequenceNoise> nz;
    std::vector<const noise::SequenceNoise*> nz_ptr;
    if (noisy) {
      nz.reserve(slots);
      for (std::size_t s = 0; s < slots; ++s) nz.push_back(synth[s]->sequence(task.schedule_index));
      for (const auto& n : nz) nz_ptr.push_back(&n);
    }
    PlayOptions opt = play;
    opt.edge_seed = derive_seed(cfg.seed, kTagEdge, k);
    const auto states = play_timetable(reg, cal, table, init, nz_ptr, opt);
    std::vector<double> p(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      p[s] = std::clamp(states[s].prob_up(), 0.0, 1.0);
      if (cfg.depolarizing_p0) {
        const double n_eff = static_cast<double>(cfg.lengths[task.li]) + 1.0;
        p[s] = 0.5 + std::pow(*cfg.depolarizing_p0, n_eff) * (p[s] - 0.5);
      }
    }
    measured[k] = measure(cfg, p, derive_seed(cfg.seed, kTagShots, k));
  });

  // Aggregate per slot and length in a fixed order.
  for (std::size_t s = 0; s < slots; ++s) {
    QubitRB q;
    q.qubit = cfg.qubits[s];
    const double sign = init[s] ? -1.0 : 1.0;
    for (std::size_t li = 0; li < n_len; ++li) {
      LengthPoint pt;
      pt.n = cfg.lengths[li];
      pt.per_randomization.assign(cfg.randomizations, 0.0);
      double sum_flip = 0.0;
      double sum_noflip = 0.0;
      for (std::size_t k = 0; k < tasks.size(); ++k) {
        if (tasks[k].li != li) continue;
        const double v = measured[k][s];
        if (tasks[k].outcome == clifford::Outcome::Flip) {
          pt.per_randomization[tasks[k].r] += sign * v;
          sum_flip += v;
        } else {
          pt.per_randomization[tasks[k].r] -= sign * v;
          sum_noflip += v;
        }
      }
      const double R = static_cast<double>(cfg.randomizations);
      pt.mean_flip = sum_flip / R;
      pt.mean_noflip = sum_noflip / R;
      pt.mean = std::accumulate(pt.per_randomization.begin(), pt.per_randomization.end(), 0.0) / R;
      double ss = 0.0;
      for (double v : pt.per_randomization) ss += (v - pt.mean) * (v - pt.mean);
      pt.stddev = std::sqrt(ss / (R - 1.0));
      pt.ci95 = 1.96 * pt.stddev / std::sqrt(R);
      q.points.push_back(std::move(pt));
    }
    std::vector<double> xs, ys, es;
    for (const auto& pt : q.points) {
      xs.push_back(static_cast<double>(pt.n));
      ys.push_back(pt.mean);
      // Shot-noise floor keeps the weights finite when every randomization agrees.
      const double shot_floor = 0.5 / std::sqrt(static_cast<double>(cfg.shots * cfg.randomizations));
      es.push_back(std::max(pt.stddev / std::sqrt(static_cast<double>(cfg.randomizations)), shot_floor));
    }
    try {
      q.fit = fit::fit_exponential_decay(xs, ys, es);
      q.fit.p = std::min(q.fit.p, 1.0);
      q.fit_ok = true;
      q.clifford_fidelity = clifford_fidelity(q.fit.p);
      q.primitive_fidelity = primitive_fidelity(q.fit.p);
      q.sigma_primitive_fidelity = 0.5 * q.fit.sigma_p / kPrimitivesPerClifford;
    } catch (const FitError& e) {
      q.fit_ok = false;
      q.fit_error = e.what();
    }
    result.qubits.push_back(std::move(q));
  }
  result.joint_fidelity = 1.0;
  for (const auto& q : result.qubits) result.joint_fidelity *= q.fit_ok ? q.primitive_fidelity : 0.0;
  return result;
}

double interleaved_fidelity(double p_ref, double p_int) {
  if (!(p_ref > 0.0)) throw std::invalid_argument("interleaved_fidelity: p_ref must be > 0");
  return 0.5 * (1.0 + p_int / p_ref);
}

InterleavedResult run_interleaved(RBConfig config, std::span<const clifford::Axis> word,
                                  const device::RegisterModel& reg, const noise::NoiseModel& noise,
                                  const CalibrationState& cal) {
  if (word.empty()) throw std::invalid_argument("run_interleaved: empty gate word");
  InterleavedResult out;
  config.interleaved.clear();
  out.reference = run_rb(config, reg, noise, cal);
  config.interleaved.assign(word.begin(), word.end());
  out.interleaved = run_rb(config, reg, noise, cal);
  const auto& a = out.reference.qubits.front();
  const auto& b = out.interleaved.qubits.front();
  if (!a.fit_ok || !b.fit_ok) throw FitError("run_interleaved: decay fit failed");
  out.fidelity = interleaved_fidelity(a.fit.p, b.fit.p);
  const double ratio = b.fit.p / a.fit.p;
  out.sigma = 0.5 * ratio * std::hypot(a.fit.sigma_p / a.fit.p, b.fit.sigma_p / b.fit.p);
  return out;
}

namespace {

SweepResult finish_sweep(std::vector<SweepPoint> pts) {
  SweepResult r;
  r.points = std::move(pts);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : r.points) {
    if (p.fit_ok && p.infidelity < best) {
      best = p.infidelity;
      r.best_x = p.x;
    }
  }
  return r;
}

SweepPoint point_from(double x, const RBResult& res) {
  const auto& q = res.qubits.front();
  SweepPoint p;
  p.x = x;
  p.fit_ok = q.fit_ok;
  p.primitive_fidelity = q.fit_ok ? q.primitive_fidelity : 0.0;
  p.infidelity = q.fit_ok ? 1.0 - q.primitive_fidelity : 1.0;
  p.sigma = q.sigma_primitive_fidelity;
  return p;
}

}  // namespace

SweepResult detuning_sweep(RBConfig config, std::span<const double> offsets_mhz,
                           const device::RegisterModel& reg, const noise::NoiseModel& noise,
                           const CalibrationState& cal) {
  std::vector<SweepPoint> pts;
  for (double d : offsets_mhz) {
    config.carrier_offset_mhz = d;
    pts.push_back(point_from(d, run_rb(config, reg, noise, cal)));
  }
  return finish_sweep(std::move(pts));
}

SweepResult gate_time_sweep(RBConfig config, std::span<const double> gate_times_ns,
                            const device::RegisterModel& reg, const noise::NoiseModel& noise) {
  std::vector<SweepPoint> pts;
  for (double tg : gate_times_ns) {
    config.gate_time_ns = tg;
    const auto cal = CalibrationState::ideal(reg, tg, config.shape, config.shape_param, config.sample_step_ns);
    pts.push_back(point_from(tg, run_rb(config, reg, noise, cal)));
  }
  return finish_sweep(std::move(pts));
}

double rabi_envelope_w(double t_us, double f_rabi_mhz, double t2_star_us) {
  if (!(f_rabi_mhz > 0.0) || !(t2_star_us > 0.0)) {
    throw std::invalid_argument("rabi_envelope_w: f_R and T2* must be > 0");
  }
  const double x = t_us / (f_rabi_mhz * t2_star_us * t2_star_us);
  return std::pow(1.0 + x * x, -0.25);
}

CoherenceFit fit_coherence(CoherenceKind kind, std::span<const double> t_us, std::span<const double> y,
                           double f_rabi_mhz, double t2_star_us) {
  if (t_us.size() != y.size()) throw std::invalid_argument("fit_coherence: length mismatch");
  if (t_us.size() < 20) throw std::invalid_argument("fit_coherence: need at least 20 points");
  if (kind != CoherenceKind::Ramsey && !(f_rabi_mhz > 0.0)) {
    throw std::invalid_argument("fit_coherence: driven kinds need f_R");
  }
  if (kind == CoherenceKind::RabiDecay && !(t2_star_us > 0.0)) {
    throw std::invalid_argument("fit_coherence: Rabi decay needs T2*");
  }
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double tmax = *std::max_element(t_us.begin(), t_us.end());
  Eigen::VectorXd p0(3);
  p0 << *ymax - *ymin, tmax / 3.0, *ymin;
  fit::ModelFn model;
  switch (kind) {
    case CoherenceKind::Ramsey:
      model = [](double t, const Eigen::VectorXd& p) { return p[0] * std::exp(-(t / p[1]) * (t / p[1])) + p[2]; };
      break;
    case CoherenceKind::RabiDecay:
      model = [f_rabi_mhz, t2_star_us](double t, const Eigen::VectorXd& p) {
        return p[0] * std::exp(-t / p[1]) * rabi_envelope_w(t, f_rabi_mhz, t2_star_us) + p[2];
      };
      break;
    case CoherenceKind::SpinLock:
      model = [](double t, const Eigen::VectorXd& p) { return p[0] * std::exp(-t / p[1]) + p[2]; };
      break;
  }
  const auto cf = fit::curve_fit(model, t_us, y, {}, p0);
  CoherenceFit out;
  out.amplitude = cf.params[0];
  out.time_us = std::abs(cf.params[1]);
  out.sigma_time_us = cf.stderr_of(1);
  out.offset = cf.params[2];
  out.residuals = cf.residuals;
  if (!(out.time_us > 0.0) || !std::isfinite(out.time_us)) throw FitError("fit_coherence: no decay found");
  if (kind != CoherenceKind::Ramsey) out.quality_factor = 2.0 * f_rabi_mhz * out.time_us;
  return out;
}

}  // namespace spinbench::experiments
