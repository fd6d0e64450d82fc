// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion;
// `acceptance 3 5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "spinbench/calibration.hpp"
#include "spinbench/calibration_state.hpp"
#include "spinbench/campaign.hpp"
#include "spinbench/clifford.hpp"
#include "spinbench/common.hpp"
#include "spinbench/config.hpp"
#include "spinbench/experiments.hpp"
#include "spinbench/noise.hpp"
#include "spinbench/pulse.hpp"

using namespace spinbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

config::Config shipped() { return config::load_config(std::string(SPINBENCH_CONFIG_DIR) + "/five_qubit.ini"); }

std::string pct(double f) { return fmt::format("{:.5f}%", 100.0 * f); }

calibration::MeasurementContext exact_context(const device::RegisterModel& reg) {
  calibration::MeasurementContext ctx;
  ctx.reg = &reg;
  ctx.shots = 0;
  return ctx;
}

// 1 ------------------------------------------------------------------------

Outcome clifford_bookkeeping() {
  const auto set = clifford::build_gate_set();
  std::size_t primitives = 0;
  for (const auto& e : set) primitives += e.decomposition.size();
  const double mean = static_cast<double>(primitives) / static_cast<double>(set.size());

  const auto& g = clifford::CliffordGroup::instance();
  std::size_t closure_bad = 0;
  for (int a = 0; a < 24; ++a) {
    for (int b = 0; b < 24; ++b) {
      const auto prod = g.element(b).matrix * g.element(a).matrix;
      if (clifford::trace_fidelity(prod, g.element(g.compose(a, b)).matrix) < 1.0 - 1e-12) ++closure_bad;
    }
    if (g.compose(a, g.inverse(a)) != clifford::kIdentity) ++closure_bad;
    if (clifford::trace_fidelity(clifford::word_unitary(g.element(a).decomposition), g.element(a).matrix) <
        1.0 - 1e-12) {
      ++closure_bad;
    }
  }

  // Recovery: the flattened program maps |down> to |down> (identity) or |up> (flip).
  std::mt19937_64 rng(7);
  std::size_t recovery_bad = 0;
  std::size_t cases = 0;
  for (std::size_t n : {1u, 2u, 3u, 10u, 57u, 256u, 2048u}) {
    for (int r = 0; r < 20; ++r) {
      for (auto out : {clifford::Outcome::Identity, clifford::Outcome::Flip}) {
        const auto seq = clifford::random_sequence(n, rng, out);
        const auto u = clifford::word_unitary(seq.primitives());
        const double p_up = std::norm(u.b);
        const double want = out == clifford::Outcome::Flip ? 1.0 : 0.0;
        if (std::abs(p_up - want) > 1e-9) ++recovery_bad;
        ++cases;
      }
    }
  }
  const bool pass = set.size() == 24 && primitives == 78 && std::abs(mean - 3.25) < 1e-15 && closure_bad == 0 &&
                    recovery_bad == 0;
  return {pass, fmt::format("{} elements, {} primitives, mean {:.4f}; closure failures {}; recovery failures {}/{}",
                            set.size(), primitives, mean, closure_bad, recovery_bad, cases)};
}

// 2 ------------------------------------------------------------------------

Outcome noiseless_exactness() {
  const auto cfg = shipped();
  const auto& reg = cfg.reg;
  const auto cal = CalibrationState::ideal(reg, 83.0);
  double worst = 0.0;
  for (std::size_t q = 0; q < reg.size(); ++q) {
    for (auto axis : {clifford::Axis::X, clifford::Axis::Y}) {
      clifford::Timetable t;
      t.gate_time_ns = 83.0;
      t.qubits = {static_cast<int>(q)};
      t.gates = {{static_cast<std::int8_t>(axis)}};
      const auto out = experiments::play_timetable(reg, cal, t, {}, {});
      device::QubitState ideal;
      ideal.apply(clifford::primitive_unitary(axis));
      worst = std::max(worst, device::trace_distance(out[0], ideal));
    }
  }

  experiments::RBConfig rb;
  rb.gate_time_ns = 83.0;
  rb.lengths = experiments::RBConfig::default_lengths(11);
  rb.randomizations = 20;
  rb.shots = 200;
  rb.qubits = {1};
  noise::NoiseModel silent;
  silent.chi = 0.0;
  const auto r = experiments::run_rb(rb, reg, silent, cal);
  const double fp = r.qubits[0].primitive_fidelity;
  const bool pass = worst < 1e-6 && r.all_fits_ok() && fp >= 0.999999;
  return {pass, fmt::format("worst pi/2 trace distance {:.2e} (< 1e-6); noiseless RB F_p {} (>= 99.9999%)", worst,
                            pct(fp))};
}

// 3 ------------------------------------------------------------------------

experiments::RBConfig single_rb(const config::Config& cfg, double tg) {
  experiments::RBConfig rb = cfg.rb;
  rb.gate_time_ns = tg;
  rb.lengths = experiments::RBConfig::default_lengths(11);
  rb.randomizations = 20;
  rb.shots = 200;
  rb.qubits.resize(1);
  rb.initial_up.clear();
  return rb;
}

double rb_fidelity(const config::Config& cfg, double tg, const noise::NoiseModel& nm, bool* fit_ok = nullptr) {
  const auto rb = single_rb(cfg, tg);
  const auto r = experiments::run_rb(rb, cfg.reg, nm, CalibrationState::ideal(cfg.reg, tg));
  if (fit_ok) *fit_ok = *fit_ok && r.all_fits_ok();
  return r.qubits[0].primitive_fidelity;
}

Outcome noise_limited_rb() {
  const auto cfg = shipped();
  noise::NoiseModel nm = cfg.noise;
  nm.chi = 1.0;
  bool ok = true;
  const double f500 = rb_fidelity(cfg, 500.0, nm, &ok);
  const double f250 = rb_fidelity(cfg, 250.0, nm, &ok);
  const double lo = 0.9997 - 0.0002;
  const double hi = std::min(1.0, 0.99995 + 0.0002);
  const bool band = f500 >= lo && f500 <= hi && f250 >= lo && f250 <= hi;

  // Quasi-static: constant within each gate, no intra-gate (HF) noise.
  noise::NoiseModel qs = nm;
  qs.hf_enabled = false;
  const double q500 = rb_fidelity(cfg, 500.0, qs, &ok);
  const double q250 = rb_fidelity(cfg, 250.0, qs, &ok);
  const double ratio = (1.0 - q500) / (1.0 - q250);

  // Informational: detuning frozen for the whole sequence.
  noise::NoiseModel frozen = qs;
  frozen.if_enabled = false;
  bool ignored = true;
  const double s500 = rb_fidelity(cfg, 500.0, frozen, &ignored);
  const double s250 = rb_fidelity(cfg, 250.0, frozen, &ignored);

  const bool pass = ok && band && std::abs(ratio - 4.0) <= 1.0;
  return {pass, fmt::format("F_p(500) {} F_p(250) {} (band [{}, {}]); quasi-static ratio {:.2f} (4 +- 1); "
                            "sequence-frozen ratio {:.1f} (info)",
                            pct(f500), pct(f250), pct(lo), pct(hi), ratio, (1.0 - s500) / (1.0 - s250))};
}

// 4 ------------------------------------------------------------------------

Outcome fast_gate_deviation() {
  const auto cfg = shipped();
  std::vector<double> fid;
  bool ok = true;
  const std::vector<double> chis{1.0, 1.25, 1.5, 2.0};
  for (double chi : chis) {
    noise::NoiseModel nm = cfg.noise;
    nm.chi = chi;
    fid.push_back(rb_fidelity(cfg, 83.0, nm, &ok));
  }
  bool monotone = true;
  for (std::size_t k = 1; k < fid.size(); ++k) monotone = monotone && fid[k] < fid[k - 1];
  // Q2 / Q3 measured at 83 ns: 99.9979% and 99.9982%.
  const double lo = 0.999979 - 0.0001;
  const double hi = std::min(1.0, 0.999982 + 0.0001);
  const bool lands = fid.back() >= lo && fid.back() <= hi;
  const double measured = 0.5 * (0.999979 + 0.999982);
  const bool toward = std::abs(fid.back() - measured) < std::abs(fid.front() - measured);
  std::string series;
  for (std::size_t k = 0; k < fid.size(); ++k) series += fmt::format("chi={} {} ", chis[k], pct(fid[k]));
  return {ok && monotone && lands && toward,
          fmt::format("{}; monotone {}; toward measured {}; chi=2 in [{}, {}]", series, monotone ? "yes" : "no",
                      toward ? "yes" : "no", pct(lo), pct(hi))};
}

// 5 ------------------------------------------------------------------------

Outcome crosstalk_physics() {
  const auto cfg = shipped();
  const auto& reg = cfg.reg;
  const auto ctx = exact_context(reg);
  const auto cal = CalibrationState::ideal(reg, cfg.rb.gate_time_ns);
  const double d34 = calibration::measure_crosstalk_phase(ctx, 2, 3, cal).dphi;
  const double d43 = calibration::measure_crosstalk_phase(ctx, 3, 2, cal).dphi;

  std::vector<double> v, ph;
  for (double s : {0.5, 0.75, 1.0, 1.25, 1.5}) {
    v.push_back(s * cal.amplitude[3]);
    ph.push_back(calibration::measure_crosstalk_phase(ctx, 2, 3, cal, 8, s).dphi);
  }
  const auto fit = calibration::fit_stark_scaling(v, ph);

  const std::size_t drivers[] = {1, 3};
  const auto sum = calibration::pairwise_sum_check(ctx, 2, drivers, cal);

  const bool pass = std::abs(d34 - 0.0379) <= 0.002 && std::abs(d43 + 0.0026) <= 0.0005 &&
                    std::abs(fit.exponent - 2.0) <= 0.05 && std::abs(sum.deviation) < 0.01;
  return {pass, fmt::format("dphi_34 {:.5f} (0.0379 +- 0.002), dphi_43 {:.5f} (-0.0026 +- 0.0005), alpha {:.4f} "
                            "(2 +- 0.05), pairwise sum deviation {:.3f}% (< 1%)",
                            d34, d43, fit.exponent, 100.0 * std::abs(sum.deviation))};
}

// 6 ------------------------------------------------------------------------

Outcome calibration_efficacy() {
  const auto cfg = shipped();
  const auto& reg = cfg.reg;
  const std::vector<std::size_t> pair{2, 3};

  experiments::RBConfig rb = cfg.rb;
  rb.qubits = pair;
  rb.initial_up.clear();
  rb.compensate = false;
  const auto raw = experiments::run_rb(rb, reg, cfg.noise, CalibrationState::ideal(reg, rb.gate_time_ns));
  rb.compensate = true;
  const auto cal = campaign::prepare_simultaneous_calibration(cfg, pair, rb.gate_time_ns, 1, 1);
  const auto tuned = experiments::run_rb(rb, reg, cfg.noise, cal);
  const double raw3 = raw.qubits[0].primitive_fidelity;
  const double cal3 = tuned.qubits[0].primitive_fidelity;
  const double cal4 = tuned.qubits[1].primitive_fidelity;
  const bool srb = raw.all_fits_ok() && tuned.all_fits_ok() && raw3 >= 0.9985 && raw3 <= 0.9995 && cal3 > 0.9999 &&
                   cal4 > 0.9999;

  // Three-qubit amplitude search from the pair-calibrated tables.
  const std::vector<std::size_t> three{1, 2, 3};
  auto state = CalibrationState::ideal(reg, rb.gate_time_ns);
  auto ctx = cfg.measurement_context(3, 1);
  calibration::measure_all_pairs(ctx, three, state);
  ctx.shots = cfg.calibration.optimizer_shots;
  optimize::NelderMeadOptions opt;
  opt.initial_step = 0.003;
  const auto rep = calibration::calibrate_simultaneous(ctx, three, state, opt);
  const auto& search = rep.full->search;
  std::size_t reached = search.iterations + 1;
  for (const auto& step : search.trace) {
    if (step.value < 0.01) {
      reached = step.iteration;
      break;
    }
  }
  const bool optimizer = search.value < 0.01 && reached <= 20;

  bool counts = true;
  for (std::size_t n = 2; n <= 5; ++n) {
    std::vector<std::size_t> qs(n);
    for (std::size_t k = 0; k < n; ++k) qs[k] = k;
    auto s = CalibrationState::ideal(reg, rb.gate_time_ns);
    const auto sched = calibration::pairwise_schedule(qs);
    const std::set<std::pair<std::size_t, std::size_t>> unique(sched.begin(), sched.end());
    counts = counts && sched.size() == n * (n - 1) && unique.size() == n * (n - 1) &&
             calibration::measure_all_pairs(exact_context(reg), qs, s) == n * (n - 1);
  }

  return {srb && optimizer && counts,
          fmt::format("uncalibrated Q3 {} ([99.85%, 99.95%]), calibrated Q3 {} Q4 {} (> 99.99%); three-qubit "
                      "objective {:.4f} reached < 0.01 at iteration {} (<= 20); N(N-1) counts {}",
                      pct(raw3), pct(cal3), pct(cal4), search.value, reached, counts ? "ok" : "wrong")};
}

// 7 ------------------------------------------------------------------------

Outcome five_qubit_srb() {
  const auto cfg = shipped();
  experiments::RBConfig rb = cfg.rb;
  rb.qubits = {0, 1, 2, 3, 4};
  rb.initial_up.assign(5, 0);
  rb.gate_time_ns = 250.0;
  rb.lengths = experiments::RBConfig::default_lengths(9);
  rb.randomizations = 15;
  rb.tomographic_readout = true;
  rb.compensate = true;
  const auto cal = campaign::prepare_simultaneous_calibration(cfg, rb.qubits, rb.gate_time_ns, 1, 1);
  const auto r = experiments::run_rb(rb, cfg.reg, cfg.noise, cal);
  std::size_t above = 0;
  std::string per;
  for (const auto& q : r.qubits) {
    const bool ok = q.fit_ok && q.primitive_fidelity > 0.999;
    above += ok ? 1 : 0;
    per += fmt::format("Q{} {} ", q.qubit + 1, pct(q.primitive_fidelity));
  }
  return {above >= 4, fmt::format("{}; {} of 5 above 99.9% (>= 4)", per, above)};
}

// 8 ------------------------------------------------------------------------

Outcome spectral_leakage() {
  const auto rect = pulse::make_shape(pulse::Shape::Rectangular, 83.0, 0.0);
  const auto rl = pulse::analyze_sidelobes(pulse::spectrum(rect, 0.0, 0.01));
  const auto kaiser = pulse::make_kaiser(83.0, 8.0);
  const auto kl = pulse::analyze_sidelobes(pulse::spectrum(kaiser, 0.0, 0.01));
  // Analytic |sinc|^2 first sidelobe: x = tan x near 4.4934.
  const double x = 4.493409457909064;
  const double sinc_db = 10.0 * std::log10(std::pow(std::sin(x) / x, 2));
  const bool lobes = std::abs(rl.first_sidelobe_db - sinc_db) <= 0.3 && kl.max_sidelobe_db < -55.0;

  const auto cfg = shipped();
  experiments::RBConfig rb = single_rb(cfg, 83.0);
  rb.lengths = experiments::RBConfig::default_lengths(9);
  rb.randomizations = 10;
  rb.shots = 1000;
  noise::NoiseModel silent;
  silent.chi = 0.0;
  const std::vector<double> grid{-0.4, -0.2, -0.1, 0.0, 0.1, 0.2, 0.4};
  const auto ks = experiments::detuning_sweep(rb, grid, cfg.reg, silent, CalibrationState::ideal(cfg.reg, 83.0));
  const std::size_t mid = 3;
  bool kaiser_min = ks.best_x == 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k != mid) kaiser_min = kaiser_min && ks.points[k].infidelity > ks.points[mid].infidelity;
  }

  auto rrb = rb;
  rrb.shape = pulse::Shape::Rectangular;
  rrb.shape_param = 0.0;
  rrb.edge_samples = 4;
  const auto rcal = CalibrationState::ideal(cfg.reg, 83.0, pulse::Shape::Rectangular, 0.0);
  const auto rs = experiments::detuning_sweep(rrb, grid, cfg.reg, silent, rcal);
  // Saturation: the edge-artifact floor dominates, so the infidelity within
  // +-0.1 MHz stays within a factor 2 of its resonant value.
  const double floor = rs.points[mid].infidelity;
  bool flat = floor > 1e-5;
  for (std::size_t k = mid - 1; k <= mid + 1; ++k) {
    flat = flat && rs.points[k].infidelity < 2.0 * floor && rs.points[k].infidelity > 0.5 * floor;
  }
  std::string kser, rser;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    kser += fmt::format("{:.1e} ", ks.points[k].infidelity);
    rser += fmt::format("{:.1e} ", rs.points[k].infidelity);
  }
  return {lobes && kaiser_min && flat,
          fmt::format("rect first sidelobe {:.2f} dB (sinc {:.2f} +- 0.3), Kaiser max sidelobe {:.1f} dB (< -55); "
                      "Kaiser infidelity [{}] min at {:+.1f} MHz; edge-artifact rect [{}] {}",
                      rl.first_sidelobe_db, sinc_db, kl.max_sidelobe_db, kser, ks.best_x, rser,
                      flat ? "saturated" : "not saturated")};
}

// 9 ------------------------------------------------------------------------

Outcome noise_round_trip() {
  noise::NoiseModel m;
  std::mt19937_64 rng(11);
  const double dt = 1e-3;
  const auto trace = noise::synthesize_band(m, 1e-4, 0.5 / dt, dt, std::size_t{1} << 23, rng);
  const auto bins = noise::log_bin(noise::verify_psd(trace, dt, std::size_t{1} << 18), 0.01, 400.0, 3);
  double worst_db = 0.0;
  for (std::size_t k = 0; k < bins.freq_hz.size(); ++k) {
    worst_db = std::max(worst_db, std::abs(10.0 * std::log10(bins.psd[k] / m.psd(bins.freq_hz[k]))));
  }
  const double decades = std::log10(bins.freq_hz.back() / bins.freq_hz.front());

  // Ramsey: a ~15 minute record of interleaved wait-time sweeps, one
  // detuning per shot from the synthesized trace.
  const std::size_t points = 61;
  const std::size_t sweeps = 8192;
  const double cycle = noise::ExperimentSchedule::kCycleTimeS;
  const auto det = noise::quasi_static_shots(m, points * sweeps, cycle, 1e5, 5);
  std::vector<double> t_us(points), p(points, 0.0);
  for (std::size_t i = 0; i < points; ++i) t_us[i] = 0.5 * static_cast<double>(i);
  for (std::size_t s = 0; s < det.size(); ++s) {
    const std::size_t i = s % points;
    p[i] += 0.5 * (1.0 + std::cos(kTwoPi * det[s] * t_us[i]));
  }
  for (double& v : p) v /= static_cast<double>(sweeps);
  const auto fit = experiments::fit_coherence(experiments::CoherenceKind::Ramsey, t_us, p);

  const bool pass = worst_db <= 3.0 && decades >= 4.0 - 1e-9 && std::abs(fit.time_us - 10.0) <= 3.0;
  return {pass, fmt::format("Welch vs model worst {:.2f} dB over {:.2f} decades (+-3 dB, 4); Ramsey T2* {:.2f} us "
                            "(10 +- 3) from a {:.0f} s record",
                            worst_db, decades, fit.time_us, static_cast<double>(det.size()) * cycle)};
}

// 10 -----------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  auto cfg = shipped();
  cfg.rb.lengths = experiments::RBConfig::default_lengths(7);
  cfg.rb.randomizations = 8;
  cfg.rb.qubits = {2, 3};
  cfg.rb.initial_up.clear();
  cfg.calibration.optimizer_shots = 20000;
  const fs::path root = fs::temp_directory_path() / fmt::format("spinbench_accept_{}", ::getpid());
  std::vector<std::string> docs;
  for (unsigned w : {1u, 4u, 8u}) {
    campaign::RunRequest req;
    req.experiment = "srb";
    req.seed = 2024;
    req.workers = w;
    req.out_dir = (root / fmt::format("w{}", w)).string();
    campaign::run_campaign(cfg, req);
    docs.push_back(slurp(fs::path(req.out_dir) / "srb.json"));
  }
  fs::remove_all(root);
  const bool same = !docs[0].empty() && docs[0] == docs[1] && docs[0] == docs[2];
  return {same, fmt::format("srb.json {} bytes; workers 1/4/8 {}", docs[0].size(),
                            same ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "clifford-bookkeeping", 5, clifford_bookkeeping},
      {2, "noiseless-exactness", 60, noiseless_exactness},
      {3, "noise-limited-rb", 1800, noise_limited_rb},
      {4, "fast-gate-deviation", 0, fast_gate_deviation},
      {5, "crosstalk-physics", 0, crosstalk_physics},
      {6, "calibration-efficacy", 0, calibration_efficacy},
      {7, "five-qubit-srb", 3600, five_qubit_srb},
      {8, "spectral-leakage", 0, spectral_leakage},
      {9, "noise-round-trip", 0, noise_round_trip},
      {10, "determinism", 0, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt::format("{:.1f} s", secs);
    if (c.budget_s > 0.0) {
      timing += fmt::format(" (budget {:.0f} s)", c.budget_s);
      if (secs > c.budget_s) {
        o.pass = false;
        timing += " over budget";
      }
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} {:>2} {}: {} [{}]", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, timing)
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
