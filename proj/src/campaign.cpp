#include "spinbench/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <stdexcept>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "spinbench/common.hpp"

namespace spinbench::campaign {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                  std::chrono::system_clock::now())));
}

std::vector<double> or_default(const std::vector<double>& grid, std::vector<double> fallback) {
  return grid.empty() ? fallback : grid;
}

struct Writer {
  fs::path dir;
  std::vector<std::string> outputs;

  std::string path(const std::string& name) {
    const auto p = (dir / name).string();
    outputs.push_back(p);
    return p;
  }
};

void sweep_plot(Writer& w, const std::string& name, const experiments::SweepResult& s) {
  std::vector<double> x, y, e;
  for (const auto& p : s.points) {
    x.push_back(p.x);
    y.push_back(p.infidelity);
    e.push_back(p.sigma);
  }
  io::write_plot_data(w.path(name), x, y, e);
}

void decay_plots(Writer& w, const std::string& stem, const experiments::RBResult& r) {
  io::write_decay_csv(w.path(stem + "_decay.csv"), r);
  for (const auto& q : r.qubits) {
    std::vector<double> x, y, e;
    for (const auto& p : q.points) {
      x.push_back(static_cast<double>(p.n));
      y.push_back(p.mean);
      e.push_back(p.ci95);
    }
    io::write_plot_data(w.path(fmt::format("{}_Q{}_plot.csv", stem, q.qubit + 1)), x, y, e);
  }
}

}  // namespace

io::Json RunManifest::to_json() const {
  return io::Json{{"experiment", experiment},
                  {"config_digest", config_digest},
                  {"seed", seed},
                  {"module_versions", {{"spinbench", kVersion}}},
                  {"started_utc", started_utc},
                  {"finished_utc", finished_utc},
                  {"fit_ok", fit_ok},
                  {"outputs", outputs}};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"rb",       "irb",        "srb",   "detuning-sweep",
                                              "tg-sweep", "cal-ladder", "fig2d", "fig5c"};
  return names;
}

CalibrationState prepare_simultaneous_calibration(const config::Config& config, std::span<const std::size_t> qubits,
                                                  double gate_time_ns, std::uint64_t seed, unsigned workers) {
  const auto& rb = config.rb;
  CalibrationState cal =
      CalibrationState::ideal(config.reg, gate_time_ns, rb.shape, rb.shape_param, rb.sample_step_ns);
  auto ctx = config.measurement_context(derive_seed(seed, 0x5843), workers);
  calibration::measure_all_pairs(ctx, qubits, cal);
  ctx.shots = config.calibration.optimizer_shots;
  calibration::calibrate_simultaneous(ctx, qubits, cal);
  return cal;
}

RunManifest run_campaign(const config::Config& config, const RunRequest& req) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), req.experiment) == names.end()) {
    throw std::invalid_argument("unknown experiment '" + req.experiment + "'");
  }
  RunManifest man;
  man.experiment = req.experiment;
  man.config_digest = config::digest(config);
  man.seed = req.seed;
  man.started_utc = utc_now();

  fs::create_directories(req.out_dir);
  Writer w{req.out_dir, {}};

  experiments::RBConfig rb = config.rb;
  rb.seed = req.seed;
  rb.workers = req.workers;
  noise::NoiseModel nm = config.noise;
  nm.seed = req.seed;
  const auto& reg = config.reg;
  auto ideal = [&](double tg) {
    return CalibrationState::ideal(reg, tg, rb.shape, rb.shape_param, rb.sample_step_ns);
  };
  auto simultaneous_cal = [&](std::span<const std::size_t> qubits, double tg) {
    if (req.calibration_path) return io::load_calibration(*req.calibration_path);
    if (!rb.compensate) return ideal(tg);
    return prepare_simultaneous_calibration(config, qubits, tg, req.seed, req.workers);
  };

  io::Json result;
  const std::string& e = req.experiment;
  if (e == "rb" || e == "srb") {
    if (e == "srb" && rb.qubits.size() < 2) throw ConfigError("[rb] qubits: srb needs at least two qubits");
    const CalibrationState cal = rb.qubits.size() > 1 ? simultaneous_cal(rb.qubits, rb.gate_time_ns)
                                                      : ideal(rb.gate_time_ns);
    const auto r = experiments::run_rb(rb, reg, nm, cal);
    man.fit_ok = r.all_fits_ok();
    result = io::to_json(r);
    result["calibration"] = io::to_json(cal);
    decay_plots(w, e, r);
  } else if (e == "irb") {
    const auto word = clifford::parse_word(req.gate_word);
    rb.qubits.resize(1);
    const auto r = experiments::run_interleaved(rb, word, reg, nm, ideal(rb.gate_time_ns));
    man.fit_ok = r.reference.all_fits_ok() && r.interleaved.all_fits_ok();
    result = io::to_json(r);
    result["gate"] = req.gate_word;
    decay_plots(w, "irb_reference", r.reference);
    decay_plots(w, "irb_interleaved", r.interleaved);
  } else if (e == "detuning-sweep") {
    const auto grid = or_default(req.grid, {-1.0, -0.5, -0.2, -0.1, 0.0, 0.1, 0.2, 0.5, 1.0});
    rb.qubits.resize(1);
    const auto s = experiments::detuning_sweep(rb, grid, reg, nm, ideal(rb.gate_time_ns));
    man.fit_ok = std::all_of(s.points.begin(), s.points.end(), [](const auto& p) { return p.fit_ok; });
    result = io::to_json(s);
    sweep_plot(w, "detuning_sweep_plot.csv", s);
  } else if (e == "tg-sweep" || e == "fig2d") {
    const auto grid = or_default(req.grid, {83.0, 125.0, 250.0, 500.0});
    io::Json per_qubit = io::Json::array();
    for (std::size_t q : rb.qubits) {
      experiments::RBConfig one = rb;
      one.qubits = {q};
      one.initial_up.clear();
      const auto s = experiments::gate_time_sweep(one, grid, reg, nm);
      man.fit_ok = man.fit_ok && std::all_of(s.points.begin(), s.points.end(), [](const auto& p) { return p.fit_ok; });
      auto j = io::to_json(s);
      j["qubit_label"] = q + 1;
      per_qubit.push_back(j);
      sweep_plot(w, fmt::format("{}_Q{}_plot.csv", e == "fig2d" ? "fig2d" : "tg_sweep", q + 1), s);
    }
    result = {{"gate_times_ns", grid}, {"qubits", per_qubit}};
  } else if (e == "cal-ladder") {
    const auto ctx = config.measurement_context(req.seed, req.workers);
    auto opts = config.calibration.ladder;
    opts.optimizer_shots = config.calibration.optimizer_shots;
    const auto rep = calibration::run_ladder(ctx, rb.qubits, opts);
    result = io::to_json(rep);
    io::write_json(w.path("calibration.json"), io::to_json(rep.state));
  } else if (e == "fig5c") {
    rb.qubits = {0, 1, 2, 3, 4};
    if (reg.size() != 5) throw ConfigError("fig5c needs a five-qubit register");
    rb.gate_time_ns = 250.0;
    rb.lengths = experiments::RBConfig::default_lengths(9);
    rb.randomizations = 15;
    rb.tomographic_readout = true;
    if (config.rb.initial_up.size() != 5) rb.initial_up.assign(5, 0);
    const CalibrationState cal = simultaneous_cal(rb.qubits, rb.gate_time_ns);
    const auto r = experiments::run_rb(rb, reg, nm, cal);
    man.fit_ok = r.all_fits_ok();
    result = io::to_json(r);
    result["calibration"] = io::to_json(cal);
    std::size_t above = 0;
    for (const auto& q : r.qubits) above += q.primitive_fidelity > 0.999 ? 1 : 0;
    result["qubits_above_99_9"] = above;
    decay_plots(w, "fig5c", r);
  }

  const io::Json doc{{"experiment", e},
                     {"seed", req.seed},
                     {"config_digest", man.config_digest},
                     {"version", kVersion},
                     {"result", result}};
  io::write_json(w.path(e + ".json"), doc);
  man.finished_utc = utc_now();
  man.outputs = w.outputs;
  const auto manifest_path = (fs::path(req.out_dir) / "manifest.json").string();
  man.outputs.push_back(manifest_path);
  io::write_json(manifest_path, man.to_json());
  return man;
}

}  // namespace spinbench::campaign
