#include "spinbench/results_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace spinbench::io {

namespace {

// JSON has no NaN; missing calibrations are written as null.
Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }
double from_number_or_null(const Json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

Json to_json(const fit::DecayFit& f) {
  return Json{{"amplitude", f.amplitude},         {"p", f.p},
              {"sigma_amplitude", f.sigma_amplitude}, {"sigma_p", f.sigma_p},
              {"cov_amplitude_p", f.cov_amplitude_p}, {"points_used", f.points_used}};
}

Json to_json(const experiments::QubitRB& rb) {
  Json points = Json::array();
  for (const auto& p : rb.points) {
    points.push_back({{"n", p.n},
                      {"mean", p.mean},
                      {"stddev", p.stddev},
                      {"ci95", p.ci95},
                      {"mean_flip", p.mean_flip},
                      {"mean_noflip", p.mean_noflip},
                      {"per_randomization", p.per_randomization}});
  }
  return Json{{"qubit_label", rb.qubit + 1},
              {"fit_ok", rb.fit_ok},
              {"fit_error", rb.fit_error},
              {"fit", to_json(rb.fit)},
              {"clifford_fidelity", rb.clifford_fidelity},
              {"primitive_fidelity", rb.primitive_fidelity},
              {"sigma_primitive_fidelity", rb.sigma_primitive_fidelity},
              {"points", points}};
}

Json to_json(const experiments::RBResult& r) {
  Json qubits = Json::array();
  for (const auto& q : r.qubits) qubits.push_back(to_json(q));
  return Json{{"joint_fidelity", r.joint_fidelity},
              {"noise_edges_hz",
               {{"f_min", r.noise_edges.f_min},
                {"f_lf_max", r.noise_edges.f_lf_max},
                {"f_if_max", r.noise_edges.f_if_max},
                {"f_hf_max", r.noise_edges.f_hf_max}}},
              {"qubits", qubits}};
}

experiments::RBResult rb_result_from_json(const Json& j) {
  experiments::RBResult r;
  r.joint_fidelity = j.at("joint_fidelity").get<double>();
  const auto& e = j.at("noise_edges_hz");
  r.noise_edges = {e.at("f_min").get<double>(), e.at("f_lf_max").get<double>(), e.at("f_if_max").get<double>(),
                   e.at("f_hf_max").get<double>()};
  for (const auto& qj : j.at("qubits")) {
    experiments::QubitRB q;
    q.qubit = qj.at("qubit_label").get<std::size_t>() - 1;
    q.fit_ok = qj.at("fit_ok").get<bool>();
    q.fit_error = qj.at("fit_error").get<std::string>();
    const auto& f = qj.at("fit");
    q.fit = {f.at("amplitude").get<double>(),       f.at("p").get<double>(),
             f.at("sigma_amplitude").get<double>(), f.at("sigma_p").get<double>(),
             f.at("cov_amplitude_p").get<double>(), f.at("points_used").get<std::size_t>()};
    q.clifford_fidelity = qj.at("clifford_fidelity").get<double>();
    q.primitive_fidelity = qj.at("primitive_fidelity").get<double>();
    q.sigma_primitive_fidelity = qj.at("sigma_primitive_fidelity").get<double>();
    for (const auto& pj : qj.at("points")) {
      experiments::LengthPoint p;
      p.n = pj.at("n").get<std::size_t>();
      p.mean = pj.at("mean").get<double>();
      p.stddev = pj.at("stddev").get<double>();
      p.ci95 = pj.at("ci95").get<double>();
      p.mean_flip = pj.at("mean_flip").get<double>();
      p.mean_noflip = pj.at("mean_noflip").get<double>();
      p.per_randomization = pj.at("per_randomization").get<std::vector<double>>();
      q.points.push_back(std::move(p));
    }
    r.qubits.push_back(std::move(q));
  }
  return r;
}

Json to_json(const experiments::SweepResult& s) {
  Json points = Json::array();
  for (const auto& p : s.points) {
    points.push_back({{"x", p.x},
                      {"primitive_fidelity", p.primitive_fidelity},
                      {"infidelity", p.infidelity},
                      {"sigma", p.sigma},
                      {"fit_ok", p.fit_ok}});
  }
  return Json{{"best_x", s.best_x}, {"points", points}};
}

Json to_json(const experiments::InterleavedResult& r) {
  return Json{{"fidelity", r.fidelity},
              {"sigma", r.sigma},
              {"reference", to_json(r.reference)},
              {"interleaved", to_json(r.interleaved)}};
}

Json to_json(const CalibrationState& s) {
  Json simultaneous = Json::array();
  for (const auto& [mask, amps] : s.simultaneous) simultaneous.push_back({{"mask", mask}, {"amplitudes", amps}});
  Json dphi = Json::array();
  for (const auto& row : s.dphi) {
    Json r = Json::array();
    for (double v : row) r.push_back(number_or_null(v));
    dphi.push_back(r);
  }
  Json fits = Json::array();
  for (const auto& [pair, f] : s.stark_fits) {
    fits.push_back({{"target", pair.first},
                    {"driver", pair.second},
                    {"coefficient", f.coefficient},
                    {"exponent", f.exponent},
                    {"sigma_exponent", f.sigma_exponent}});
  }
  return Json{{"gate_time_ns", s.gate_time_ns},
              {"shape", std::string(pulse::to_string(s.shape))},
              {"shape_param", s.shape_param},
              {"sample_step_ns", s.sample_step_ns},
              {"carrier_mhz", s.carrier_mhz},
              {"amplitude", s.amplitude},
              {"simultaneous", simultaneous},
              {"dphi_rad", dphi},
              {"stark_fits", fits}};
}

CalibrationState calibration_from_json(const Json& j) {
  CalibrationState s;
  s.gate_time_ns = j.at("gate_time_ns").get<double>();
  s.shape = pulse::shape_from_string(j.at("shape").get<std::string>());
  s.shape_param = j.at("shape_param").get<double>();
  s.sample_step_ns = j.at("sample_step_ns").get<double>();
  s.carrier_mhz = j.at("carrier_mhz").get<std::vector<double>>();
  s.amplitude = j.at("amplitude").get<std::vector<double>>();
  if (s.carrier_mhz.size() != s.amplitude.size()) {
    throw std::invalid_argument("calibration JSON: carrier and amplitude lengths differ");
  }
  for (const auto& e : j.at("simultaneous")) {
    s.simultaneous[e.at("mask").get<QubitMask>()] = e.at("amplitudes").get<std::vector<double>>();
  }
  for (const auto& row : j.at("dphi_rad")) {
    std::vector<double> r;
    for (const auto& v : row) r.push_back(from_number_or_null(v));
    s.dphi.push_back(std::move(r));
  }
  for (const auto& f : j.at("stark_fits")) {
    s.stark_fits[{f.at("target").get<std::size_t>(), f.at("driver").get<std::size_t>()}] = {
        f.at("coefficient").get<double>(), f.at("exponent").get<double>(), f.at("sigma_exponent").get<double>()};
  }
  return s;
}

Json to_json(const calibration::CrosstalkMeasurement& m) {
  return Json{{"dphi_rad", m.dphi}, {"sigma", m.sigma}, {"blocks", m.blocks}, {"phases", m.phases}};
}

Json to_json(const calibration::OptimizeResult& r) {
  Json trace = Json::array();
  for (const auto& t : r.search.trace) {
    trace.push_back({{"iteration", t.iteration}, {"best", t.best}, {"value", t.value}});
  }
  return Json{{"amplitudes", r.amplitudes},
              {"value", r.search.value},
              {"converged", r.search.converged},
              {"iterations", r.search.iterations},
              {"evaluations", r.search.evaluations},
              {"restarts", r.search.restarts},
              {"trace", trace}};
}

Json to_json(const calibration::LadderReport& rep) {
  Json coarse = Json::array();
  for (const auto& c : rep.coarse) {
    coarse.push_back({{"f_mhz", c.f_mhz}, {"sigma_mhz", c.sigma_mhz}, {"rabi_mhz", c.rabi_mhz}});
  }
  Json fine = Json::array();
  for (const auto& f : rep.fine) {
    fine.push_back({{"carrier_mhz", f.carrier_mhz},
                    {"fringe_mhz", f.fringe_mhz},
                    {"t2_star_us", f.t2_star_us},
                    {"contrast", f.contrast}});
  }
  Json out{{"state", to_json(rep.state)},
           {"spectroscopy", coarse},
           {"ramsey", fine},
           {"pair_measurements", rep.pair_measurements}};
  if (rep.amplitudes) {
    Json pairs = Json::array();
    for (std::size_t k = 0; k < rep.amplitudes->pairs.size(); ++k) {
      const auto [a, b] = rep.amplitudes->pairs[k];
      pairs.push_back({{"qubit_labels", {a + 1, b + 1}}, {"search", to_json(rep.amplitudes->pair_results[k])}});
    }
    out["amplitude_search"] = {{"pairs", pairs},
                               {"full", rep.amplitudes->full ? to_json(*rep.amplitudes->full) : Json(nullptr)}};
  } else {
    out["amplitude_search"] = nullptr;
  }
  return out;
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return Json::parse(in);
}

CalibrationState load_calibration(const std::string& path) {
  const Json j = read_json(path);
  return calibration_from_json(j.contains("state") ? j.at("state") : j);
}

void write_decay_csv(const std::string& path, const experiments::RBResult& result) {
  auto out = open_out(path);
  out << "qubit,n,mean,stddev,ci95,mean_flip,mean_noflip\n";
  for (const auto& q : result.qubits) {
    for (const auto& p : q.points) {
      out << fmt::format("{},{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", q.qubit + 1, p.n, p.mean, p.stddev,
                         p.ci95, p.mean_flip, p.mean_noflip);
    }
  }
}

void write_plot_data(const std::string& path, std::span<const double> x, std::span<const double> y,
                     std::span<const double> yerr) {
  if (x.size() != y.size() || (!yerr.empty() && yerr.size() != x.size())) {
    throw std::invalid_argument("write_plot_data: column lengths differ");
  }
  auto out = open_out(path);
  out << "x,y,yerr\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << fmt::format("{:.10g},{:.10g},{:.10g}\n", x[i], y[i], yerr.empty() ? 0.0 : yerr[i]);
  }
}

}  // namespace spinbench::io
