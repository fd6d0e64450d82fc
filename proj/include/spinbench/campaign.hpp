#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinbench/config.hpp"
#include "spinbench/results_io.hpp"

namespace spinbench::campaign {

inline constexpr const char* kVersion = "0.1.0";

struct RunRequest {
  std::string experiment;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string out_dir = "out";
  std::optional<std::string> calibration_path;   // srb/fig5c: reuse a saved calibration
  std::vector<double> grid;                      // sweep points; empty -> preset grid
  std::string gate_word = "X";                   // irb
};

struct RunManifest {
  std::string experiment;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;
  bool fit_ok = true;

  io::Json to_json() const;
};

/// rb, irb, srb, detuning-sweep, tg-sweep, cal-ladder, fig2d, fig5c.
const std::vector<std::string>& experiment_names();

/// Runs one preset and writes <experiment>.json plus CSV and plot data into
/// out_dir, then manifest.json. Results depend only on (config, seed); the
/// timestamps live in the manifest alone. Throws std::invalid_argument for
/// an unknown experiment.
RunManifest run_campaign(const config::Config& config, const RunRequest& request);

/// Pair phases and simultaneous amplitude tables for SRB of `qubits` at the
/// configured RB gate time.
CalibrationState prepare_simultaneous_calibration(const config::Config& config, std::span<const std::size_t> qubits,
                                                  double gate_time_ns, std::uint64_t seed, unsigned workers);

}  // namespace spinbench::campaign
