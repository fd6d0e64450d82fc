#include "spinbench/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spinbench/common.hpp"

namespace spinbench::config {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string strip_comment(const std::string& v) {
  const auto pos = v.find_first_of(";#");
  return trim(pos == std::string::npos ? v : v.substr(0, pos));
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return strip_comment(*v);
  }

  double number(const std::string& key, double fallback) const {
    const auto v = raw(key);
    return v ? parse_double(key, *v) : fallback;
  }

  double required_number(const std::string& key, const std::string& who) const {
    const auto v = raw(key);
    if (!v) throw ConfigError("[" + name_ + "] missing " + key + " (" + who + ")");
    return parse_double(key, *v);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ConfigError(field(key) + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(field(key) + ": expected a boolean, got '" + *v + "'");
  }

  std::string text(const std::string& key, const std::string& fallback) const { return raw(key).value_or(fallback); }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    const auto v = raw(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
  }

  std::string field(const std::string& key) const { return "[" + name_ + "] " + key; }

 private:
  double parse_double(const std::string& key, const std::string& v) const {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
      throw ConfigError(field(key) + ": expected a number, got '" + v + "'");
    }
    return out;
  }

  std::string name_;
  const pt::ptree* tree_;
};

Section section(const pt::ptree& root, const std::string& name) {
  const auto child = root.get_child_optional(pt::ptree::path_type(name, '\0'));
  return {name, child ? &*child : nullptr};
}

// "3_4" -> (2, 3) register indices.
std::pair<std::size_t, std::size_t> parse_pair(const std::string& key, const std::string& prefix,
                                               const device::RegisterModel& reg, const std::string& where) {
  if (key.rfind(prefix, 0) != 0) throw ConfigError(where + ": unknown key " + key);
  const std::string rest = key.substr(prefix.size());
  const auto sep = rest.find('_');
  if (sep == std::string::npos) throw ConfigError(where + ": expected " + prefix + "i_j, got " + key);
  try {
    const int i = std::stoi(rest.substr(0, sep));
    const int j = std::stoi(rest.substr(sep + 1));
    return {reg.index_of_label(i), reg.index_of_label(j)};
  } catch (const std::exception&) {
    throw ConfigError(where + ": " + key + " names an unknown qubit");
  }
}

template <typename F>
auto invariant(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

calibration::MeasurementContext Config::measurement_context(std::uint64_t seed, unsigned workers) const {
  calibration::MeasurementContext ctx;
  ctx.reg = &reg;
  if (calibration.noise) ctx.noise = noise;
  ctx.shots = calibration.shots;
  ctx.noise_samples = calibration.noise_samples;
  ctx.seed = seed;
  ctx.workers = workers;
  return ctx;
}

Config parse_config(std::string_view text, const std::string& source) {
  pt::ptree root;
  {
    std::istringstream in{std::string(text)};
    try {
      pt::ini_parser::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(source + ":" + std::to_string(e.line()) + ": parse error: " + e.message());
    }
  }
  std::map<std::string, std::string> entries;
  for (const auto& [sec, tree] : root) {
    if (tree.empty()) throw ConfigError(source + ": key '" + sec + "' outside any section");
    for (const auto& [key, value] : tree) entries[sec + "." + key] = strip_comment(value.data());
  }

  // Qubits: sections Q1, Q2, ... in label order.
  std::vector<device::QubitParams> qubits;
  std::map<std::size_t, device::HeatingModel> heating;
  for (const auto& [sec, tree] : root) {
    if (sec.size() < 2 || sec[0] != 'Q' || !std::all_of(sec.begin() + 1, sec.end(), ::isdigit)) continue;
    const Section s(sec, &tree);
    device::QubitParams q;
    q.label = std::stoi(sec.substr(1));
    const std::string who = "qubit " + std::to_string(q.label);
    q.f_res_mhz = s.required_number("f_res", who);
    q.drive_efficiency = s.required_number("drive_efficiency", who);
    q.t2_star_us = s.number("t2_star", q.t2_star_us);
    q.t2_hahn_us = s.number("t2_hahn", q.t2_hahn_us);
    q.rabi_linearity_limit_mhz = s.number("rabi_linearity_limit", q.rabi_linearity_limit_mhz);
    if (s.raw("heating_df_max")) {
      device::HeatingModel h;
      h.df_max_khz = s.number("heating_df_max", h.df_max_khz);
      h.tau_us = s.number("heating_tau", h.tau_us);
      heating[qubits.size()] = h;
    }
    qubits.push_back(q);
  }
  if (qubits.empty()) throw ConfigError(source + ": no [Qn] qubit sections");
  // Heating keys were attached by position; reorder with the qubits.
  std::vector<std::size_t> order(qubits.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return qubits[a].label < qubits[b].label; });
  std::vector<device::QubitParams> sorted;
  std::map<std::size_t, device::HeatingModel> heating_sorted;
  for (std::size_t k = 0; k < order.size(); ++k) {
    sorted.push_back(qubits[order[k]]);
    if (auto it = heating.find(order[k]); it != heating.end()) heating_sorted[k] = it->second;
    if (k > 0 && sorted[k].label == sorted[k - 1].label) {
      throw ConfigError("duplicate qubit label " + std::to_string(sorted[k].label));
    }
  }

  const Section reg_sec = section(root, "register");
  device::RegisterOptions opts;
  opts.detuning_floor_mhz = reg_sec.number("detuning_floor", opts.detuning_floor_mhz);
  opts.stark_offset_mhz = reg_sec.number("stark_offset", opts.stark_offset_mhz);

  // Labels are needed to resolve pair keys; a plain register comes first.
  const device::RegisterModel plain =
      invariant("[register]", [&] { return device::RegisterModel(sorted, {}, {}, heating_sorted, opts); });
  std::map<device::RegisterModel::Pair, double> kappa;
  std::map<device::RegisterModel::Pair, double> eta;
  const Section stark = section(root, "stark");
  if (stark.present()) {
    for (const auto& [key, value] : *root.get_child_optional("stark")) {
      (void)value;
      kappa[parse_pair(key, "kappa_", plain, "[stark]")] = stark.required_number(key, "Stark coefficient");
    }
  }
  const Section shift = section(root, "drive_shift");
  if (shift.present()) {
    for (const auto& [key, value] : *root.get_child_optional("drive_shift")) {
      (void)value;
      eta[parse_pair(key, "eta_", plain, "[drive_shift]")] = shift.required_number(key, "drive shift");
    }
  }
  device::RegisterModel reg = invariant("[stark]/[drive_shift]", [&] {
    return device::RegisterModel(sorted, kappa, eta, heating_sorted, opts);
  });

  const Section ns = section(root, "noise");
  noise::NoiseModel nm;
  nm.psd_coeff_a = ns.number("psd_coeff_a", nm.psd_coeff_a);
  nm.psd_exponent_a = ns.number("psd_exponent_a", nm.psd_exponent_a);
  nm.psd_coeff_b = ns.number("psd_coeff_b", nm.psd_coeff_b);
  nm.psd_exponent_b = ns.number("psd_exponent_b", nm.psd_exponent_b);
  nm.overall_scale = ns.number("overall_scale", nm.overall_scale);
  nm.chi = ns.number("chi", 1.0);
  nm.f_lf_max = ns.number("f_lf_max", nm.f_lf_max);
  nm.f_if_max = ns.number("f_if_max", nm.f_if_max);
  nm.f_hf_max = ns.number("f_hf_max", nm.f_hf_max);
  nm.hf_update_step_ns = ns.number("hf_update_step", nm.hf_update_step_ns);
  nm.lf_enabled = ns.flag("lf", nm.lf_enabled);
  nm.if_enabled = ns.flag("if", nm.if_enabled);
  nm.hf_enabled = ns.flag("hf", nm.hf_enabled);
  nm.seed = ns.count("seed", nm.seed);
  invariant("[noise]", [&] {
    nm.validate();
    return 0;
  });

  const Section rs = section(root, "rb");
  experiments::RBConfig rb;
  rb.gate_time_ns = rs.number("gate_time", rb.gate_time_ns);
  rb.lengths = experiments::RBConfig::default_lengths(static_cast<int>(rs.count("max_length_exponent", 11)));
  rb.randomizations = rs.count("randomizations", rb.randomizations);
  rb.shots = rs.count("shots", rb.shots);
  rb.shape = invariant(rs.field("shape"), [&] { return pulse::shape_from_string(rs.text("shape", "kaiser")); });
  rb.shape_param = rs.number("shape_param", pulse::default_shape_param(rb.shape));
  rb.sample_step_ns = rs.number("sample_step", rb.sample_step_ns);
  rb.idle_ns = rs.number("idle", rb.idle_ns);
  rb.compensate = rs.flag("compensate", rb.compensate);
  rb.awg_dead_time = rs.flag("awg_dead_time", rb.awg_dead_time);
  rb.carrier_offset_mhz = rs.number("carrier_offset", rb.carrier_offset_mhz);
  rb.edge_samples = rs.count("edge_samples", rb.edge_samples);
  rb.seed = rs.count("seed", rb.seed);
  rb.workers = static_cast<unsigned>(rs.count("workers", rb.workers));
  rb.tomographic_readout = rs.flag("tomographic_readout", rb.tomographic_readout);
  if (const auto labels = rs.list("qubits"); !labels.empty()) {
    rb.qubits.clear();
    for (double l : labels) {
      rb.qubits.push_back(invariant(rs.field("qubits"), [&] { return reg.index_of_label(static_cast<int>(l)); }));
    }
  }
  for (double v : rs.list("initial_up")) rb.initial_up.push_back(v != 0.0 ? 1 : 0);

  const Section ro = section(root, "readout");
  rb.readout.threshold = ro.number("threshold", rb.readout.threshold);
  rb.readout.signal_width = ro.number("signal_width", rb.readout.signal_width);
  rb.readout.even_to_odd = ro.number("even_to_odd", rb.readout.even_to_odd);
  rb.readout.odd_to_even = ro.number("odd_to_even", rb.readout.odd_to_even);
  rb.readout.cnot_depolarizing = ro.number("cnot_depolarizing", rb.readout.cnot_depolarizing);
  invariant("[rb]/[readout]", [&] {
    rb.validate();
    for (std::size_t q : rb.qubits) {
      if (q >= reg.size()) throw std::invalid_argument("qubit out of range");
    }
    return 0;
  });

  const Section cs = section(root, "calibration");
  CalibrationSettings cal;
  cal.ladder.gate_time_ns = cs.number("gate_time", cal.ladder.gate_time_ns);
  cal.ladder.shape = invariant(cs.field("shape"), [&] { return pulse::shape_from_string(cs.text("shape", "kaiser")); });
  cal.ladder.shape_param = cs.number("shape_param", pulse::default_shape_param(cal.ladder.shape));
  cal.ladder.frequency_guess_offset_mhz = cs.number("frequency_guess_offset", cal.ladder.frequency_guess_offset_mhz);
  cal.ladder.crosstalk = cs.flag("crosstalk", cal.ladder.crosstalk);
  cal.ladder.optimize_amplitudes = cs.flag("optimize_amplitudes", cal.ladder.optimize_amplitudes);
  cal.shots = cs.count("shots", cal.shots);
  cal.noise_samples = cs.count("noise_samples", cal.noise_samples);
  cal.optimizer_shots = cs.count("optimizer_shots", cal.optimizer_shots);
  cal.noise = cs.flag("noise", cal.noise);
  if (!(cal.ladder.gate_time_ns > 0.0)) throw ConfigError(cs.field("gate_time") + " must be > 0");

  return Config{std::move(reg), nm, std::move(rb), cal, std::move(entries), source};
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string digest(const Config& config) {
  std::string canonical;
  for (const auto& [k, v] : config.entries) canonical += k + "=" + v + "\n";
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("digest: SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

}  // namespace spinbench::config
