#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "spinbench/calibration.hpp"
#include "spinbench/device_model.hpp"
#include "spinbench/experiments.hpp"
#include "spinbench/noise.hpp"

namespace spinbench::config {

/// Settings for the calibration ladder and its simulated measurements.
struct CalibrationSettings {
  calibration::LadderOptions ladder;
  std::size_t shots = 1000;
  std::size_t noise_samples = 16;
  std::size_t optimizer_shots = 100000;
  bool noise = true;
};

/// Everything a run needs, validated at load time. Qubits are referred to by
/// their 1-based labels in the file and by register index in memory.
struct Config {
  device::RegisterModel reg;
  noise::NoiseModel noise;
  experiments::RBConfig rb;
  CalibrationSettings calibration;
  // "section.key" -> value, sorted; the digest is computed from this.
  std::map<std::string, std::string> entries;
  std::string source;

  calibration::MeasurementContext measurement_context(std::uint64_t seed, unsigned workers) const;
};

/// INI-style text: [noise], [register], [Qn] per qubit, [stark] with
/// kappa_i_j, [drive_shift] with eta_i_j, [rb], [readout], [calibration].
/// Throws ConfigError with the line on syntax errors and the offending field
/// on invariant violations.
Config parse_config(std::string_view text, const std::string& source = "<string>");
Config load_config(const std::string& path);

/// SHA-256 over the sorted entries; independent of key order in the file.
std::string digest(const Config& config);

}  // namespace spinbench::config
