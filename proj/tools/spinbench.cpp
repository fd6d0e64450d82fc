// spinbench command-line front end.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spinbench/campaign.hpp"
#include "spinbench/common.hpp"
#include "spinbench/config.hpp"
#include "spinbench/pulse.hpp"
#include "spinbench/results_io.hpp"

namespace sb = spinbench;

namespace {

enum Exit { kOk = 0, kConfig = 2, kFit = 3, kRuntime = 4 };

struct Globals {
  std::string config = "configs/five_qubit.ini";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out;

  std::string out_dir() const {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("SPINBENCH_OUT"); env && *env) return env;
    return "out";
  }
};

int fail(const Globals& g, Exit code, const std::string& kind, const std::string& message) {
  const sb::io::Json err{{"error", {{"code", static_cast<int>(code)}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  try {
    std::filesystem::create_directories(g.out_dir());
    sb::io::write_json((std::filesystem::path(g.out_dir()) / "error.json").string(), err);
  } catch (...) {
  }
  return code;
}

std::vector<std::size_t> labels_to_indices(const sb::device::RegisterModel& reg, const std::vector<int>& labels) {
  std::vector<std::size_t> out;
  for (int l : labels) out.push_back(reg.index_of_label(l));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin-qubit register simulator: pulses, randomized benchmarking, calibration"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Register/noise/experiment config (INI)");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory (default $SPINBENCH_OUT or ./out)");

  // pulse
  auto* pulse = app.add_subcommand("pulse", "Pulse envelopes and spectra");
  pulse->require_subcommand(1);
  std::string shape = "kaiser";
  double beta = -1.0;
  double tg = 83.0;
  double step = sb::pulse::kDefaultSampleStepNs;
  double carrier = 0.0;
  double resolution = 0.01;
  for (auto* sc : {pulse->add_subcommand("synth", "Write the envelope as CSV"),
                   pulse->add_subcommand("spectrum", "Write the power spectrum as CSV")}) {
    sc->add_option("--shape", shape, "rectangular|kaiser|sech|gaussian|gaussian_square");
    sc->add_option("--beta,--param", beta, "Kaiser beta or width parameter (default per shape)");
    sc->add_option("--tg", tg, "Gate time [ns]");
    sc->add_option("--step", step, "Sample step [ns]");
  }
  auto* spectrum = pulse->get_subcommand("spectrum");
  spectrum->add_option("--carrier", carrier, "Carrier [MHz]");
  spectrum->add_option("--resolution", resolution, "Bin width [MHz]");

  // rb
  auto* rb = app.add_subcommand("rb", "Randomized benchmarking");
  rb->require_subcommand(1);
  std::vector<double> grid;
  std::string calibration_path;
  std::string gate_word = "X";
  auto* rb_run = rb->add_subcommand("run", "Single-qubit RB of the configured qubits");
  auto* rb_srb = rb->add_subcommand("srb", "Simultaneous RB");
  auto* rb_irb = rb->add_subcommand("irb", "Interleaved RB");
  auto* rb_det = rb->add_subcommand("sweep-detuning", "RB against carrier offset [MHz]");
  auto* rb_tg = rb->add_subcommand("sweep-tg", "RB against gate time [ns]");
  rb_srb->add_option("--calibration", calibration_path, "Calibration JSON to reuse");
  rb_irb->add_option("--gate", gate_word, "Interleaved primitive word");
  rb_det->add_option("--grid", grid, "Offsets [MHz]");
  rb_tg->add_option("--grid", grid, "Gate times [ns]");

  // cal
  auto* cal = app.add_subcommand("cal", "Calibration");
  cal->require_subcommand(1);
  auto* cal_ladder = cal->add_subcommand("run-ladder", "Full calibration ladder");
  auto* cal_xtalk = cal->add_subcommand("xtalk", "Crosstalk phase of one ordered pair");
  auto* cal_opt = cal->add_subcommand("optimize", "Simultaneous amplitude search");
  std::vector<int> pair;
  std::vector<int> qubits;
  cal_xtalk->add_option("--pair", pair, "Target and driver labels, e.g. 3 4")->expected(2)->required();
  cal_opt->add_option("--qubits", qubits, "Qubit labels")->delimiter(',')->required();

  // run
  auto* run = app.add_subcommand("run", "Run a named preset");
  std::string experiment;
  run->add_option("experiment", experiment, "rb|irb|srb|detuning-sweep|tg-sweep|cal-ladder|fig2d|fig5c")
      ->required();
  run->add_option("--grid", grid, "Sweep points");
  run->add_option("--calibration", calibration_path, "Calibration JSON to reuse");
  run->add_option("--gate", gate_word, "Interleaved primitive word (irb)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return fail(g, kConfig, "usage", e.what());
  }

  try {
    const std::string out = g.out_dir();
    if (*pulse) {
      const auto s = sb::pulse::shape_from_string(shape);
      const double param = beta >= 0.0 ? beta : sb::pulse::default_shape_param(s);
      const auto env = sb::pulse::make_shape(s, tg, param, step);
      std::filesystem::create_directories(out);
      if (pulse->got_subcommand("synth")) {
        const auto path = (std::filesystem::path(out) / "envelope.csv").string();
        sb::pulse::write_envelope_csv(env, path);
        std::cout << path << '\n';
      } else {
        const auto table = sb::pulse::spectrum(env, carrier, resolution);
        const auto path = (std::filesystem::path(out) / "spectrum.csv").string();
        sb::pulse::write_spectrum_csv(table, path);
        const auto lobes = sb::pulse::analyze_sidelobes(table);
        std::cout << fmt::format("{}\nfirst sidelobe {:.2f} dB at {:+.4f} MHz, max sidelobe {:.2f} dB\n", path,
                                 lobes.first_sidelobe_db, lobes.first_sidelobe_offset_mhz, lobes.max_sidelobe_db);
      }
      return kOk;
    }

    const auto config = sb::config::load_config(g.config);
    sb::campaign::RunRequest req;
    req.seed = g.seed;
    req.workers = g.workers;
    req.out_dir = out;
    req.grid = grid;
    req.gate_word = gate_word;
    if (!calibration_path.empty()) req.calibration_path = calibration_path;

    if (*cal && !cal->got_subcommand("run-ladder")) {
      std::filesystem::create_directories(out);
      auto ctx = config.measurement_context(g.seed, g.workers);
      const auto& r = config.rb;
      auto state = sb::CalibrationState::ideal(config.reg, r.gate_time_ns, r.shape, r.shape_param, r.sample_step_ns);
      sb::io::Json doc;
      if (*cal_xtalk) {
        const auto idx = labels_to_indices(config.reg, pair);
        const auto m = sb::calibration::measure_crosstalk_phase(ctx, idx[0], idx[1], state);
        doc = sb::io::to_json(m);
        doc["pair_labels"] = pair;
        std::cout << fmt::format("dphi_{}{} = {:.6f} +- {:.6f} rad per gate\n", pair[0], pair[1], m.dphi, m.sigma);
      } else {
        const auto idx = labels_to_indices(config.reg, qubits);
        sb::calibration::measure_all_pairs(ctx, idx, state);
        ctx.shots = config.calibration.optimizer_shots;
        std::vector<double> init;
        for (std::size_t q : idx) init.push_back(state.amplitude_for(q, sb::mask_of(idx)));
        const auto res = sb::calibration::optimize_simultaneous_amplitudes(ctx, idx, init, state);
        doc = sb::io::to_json(res);
        doc["qubit_labels"] = qubits;
        doc["calibration"] = sb::io::to_json(state);
        std::cout << fmt::format("objective {:.5f} after {} iterations ({})\n", res.search.value,
                                 res.search.iterations, res.search.converged ? "converged" : "not converged");
      }
      const auto path = (std::filesystem::path(out) / (*cal_xtalk ? "xtalk.json" : "optimize.json")).string();
      sb::io::write_json(path, doc);
      std::cout << path << '\n';
      return kOk;
    }

    if (*rb_run) req.experiment = "rb";
    if (*rb_srb) req.experiment = "srb";
    if (*rb_irb) req.experiment = "irb";
    if (*rb_det) req.experiment = "detuning-sweep";
    if (*rb_tg) req.experiment = "tg-sweep";
    if (*cal_ladder) req.experiment = "cal-ladder";
    if (*run) req.experiment = experiment;

    const auto manifest = sb::campaign::run_campaign(config, req);
    for (const auto& p : manifest.outputs) std::cout << p << '\n';
    if (!manifest.fit_ok) return fail(g, kFit, "fit", "one or more decay fits failed; raw data written");
    return kOk;
  } catch (const sb::ConfigError& e) {
    return fail(g, kConfig, "config", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(g, kConfig, "usage", e.what());
  } catch (const sb::FitError& e) {
    return fail(g, kFit, "fit", e.what());
  } catch (const std::exception& e) {
    return fail(g, kRuntime, "runtime", e.what());
  }
}
