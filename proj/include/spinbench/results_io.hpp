#pragma once

#include <span>
#include <string>

#include "json.hpp"
#include "spinbench/calibration.hpp"
#include "spinbench/calibration_state.hpp"
#include "spinbench/experiments.hpp"

namespace spinbench::io {

using Json = nlohmann::ordered_json;

Json to_json(const fit::DecayFit& fit);
Json to_json(const experiments::QubitRB& rb);
Json to_json(const experiments::RBResult& result);
Json to_json(const experiments::SweepResult& sweep);
Json to_json(const experiments::InterleavedResult& result);
Json to_json(const CalibrationState& state);
Json to_json(const calibration::LadderReport& report);
Json to_json(const calibration::CrosstalkMeasurement& m);
Json to_json(const calibration::OptimizeResult& r);

experiments::RBResult rb_result_from_json(const Json& j);
CalibrationState calibration_from_json(const Json& j);

/// Pretty-printed, key order as inserted; doubles round-trip exactly.
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);
CalibrationState load_calibration(const std::string& path);

/// n, qubit, mean, stddev, ci95, mean_flip, mean_noflip per length.
void write_decay_csv(const std::string& path, const experiments::RBResult& result);
/// x, y, yerr rows for plotting.
void write_plot_data(const std::string& path, std::span<const double> x, std::span<const double> y,
                     std::span<const double> yerr);

}  // namespace spinbench::io
