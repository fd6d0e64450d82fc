#include "spinbench/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "spinbench/common.hpp"
#include "spinbench/fft.hpp"

namespace spinbench::pulse {

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Rectangular: return "rectangular";
    case Shape::Kaiser: return "kaiser";
    case Shape::Sech: return "sech";
    case Shape::Gaussian: return "gaussian";
    case Shape::GaussianSquare: return "gaussian_square";
  }
  return "unknown";
}

Shape shape_from_string(std::string_view name) {
  for (Shape s : {Shape::Rectangular, Shape::Kaiser, Shape::Sech, Shape::Gaussian,
                  Shape::GaussianSquare}) {
    if (to_string(s) == name) return s;
  }
  if (name == "rect") return Shape::Rectangular;
  throw std::invalid_argument("unknown pulse shape '" + std::string(name) + "'");
}

double bessel_i0(double x) {
  // sum_k ((x/2)^k / k!)^2; stop once a term no longer moves the sum.
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

PulseEnvelope::PulseEnvelope(Shape shape, double gate_time_ns, double amplitude,
                             double shape_param, double sample_step_ns,
                             std::vector<double> samples)
    : shape_(shape),
      gate_time_ns_(gate_time_ns),
      amplitude_(amplitude),
      shape_param_(shape_param),
      sample_step_ns_(sample_step_ns),
      samples_(std::move(samples)) {
  if (samples_.size() < 2) throw std::invalid_argument("PulseEnvelope: need at least two samples");
  for (double v : samples_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("PulseEnvelope: samples must be finite and non-negative");
    }
  }
}

double PulseEnvelope::peak() const { return *std::max_element(samples_.begin(), samples_.end()); }

double PulseEnvelope::area() const {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < samples_.size(); ++k) sum += samples_[k] + samples_[k + 1];
  return 0.5 * sum * sample_step_ns_;
}

std::vector<double> PulseEnvelope::step_values() const {
  std::vector<double> out(samples_.size() - 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = 0.5 * (samples_[k] + samples_[k + 1]);
  return out;
}

PulseEnvelope PulseEnvelope::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("PulseEnvelope::scaled: factor must be finite and >= 0");
  }
  std::vector<double> s(samples_);
  for (double& v : s) v *= factor;
  return PulseEnvelope(shape_, gate_time_ns_, amplitude_ * factor, shape_param_,
                       sample_step_ns_, std::move(s));
}

namespace {

std::size_t step_count_for(double gate_time_ns, double sample_step_ns) {
  if (!(gate_time_ns > 0.0) || !(sample_step_ns > 0.0)) {
    throw std::invalid_argument("pulse: gate_time and sample_step must be positive");
  }
  if (sample_step_ns > gate_time_ns / 16.0) {
    throw std::invalid_argument("pulse: sample_step must not exceed gate_time/16");
  }
  return static_cast<std::size_t>(std::llround(gate_time_ns / sample_step_ns));
}

// Evaluates w on the first half of the grid and mirrors it, so the window is
// exactly symmetric about t_g/2.
template <typename Window>
std::vector<double> symmetric_samples(std::size_t steps, Window&& w) {
  std::vector<double> s(steps + 1);
  for (std::size_t k = 0; k <= steps / 2; ++k) {
    // x in [-1, 1]: position relative to the pulse centre.
    const double x = 2.0 * static_cast<double>(k) / static_cast<double>(steps) - 1.0;
    s[k] = w(x);
    s[steps - k] = s[k];
  }
  return s;
}

}  // namespace

double default_shape_param(Shape shape) {
  switch (shape) {
    case Shape::Rectangular: return 0.0;
    case Shape::Kaiser: return kDefaultKaiserBeta;
    case Shape::Sech: return kDefaultSechWidth;
    case Shape::Gaussian:
    case Shape::GaussianSquare: return kDefaultGaussianWidth;
  }
  return 0.0;
}

PulseEnvelope make_kaiser(double gate_time_ns, double beta, double sample_step_ns) {
  return make_shape(Shape::Kaiser, gate_time_ns, beta, sample_step_ns);
}

PulseEnvelope make_shape(Shape shape, double gate_time_ns, double shape_param,
                         double sample_step_ns, double flat_fraction) {
  const std::size_t steps = step_count_for(gate_time_ns, sample_step_ns);
  const double step = gate_time_ns / static_cast<double>(steps);
  std::vector<double> s;
  switch (shape) {
    case Shape::Rectangular:
      s.assign(steps + 1, 1.0);
      break;
    case Shape::Kaiser: {
      if (!(shape_param >= 0.0)) throw std::invalid_argument("make_kaiser: beta must be >= 0");
      const double norm = bessel_i0(shape_param);
      s = symmetric_samples(steps, [&](double x) {
        return bessel_i0(shape_param * std::sqrt(std::max(0.0, 1.0 - x * x))) / norm;
      });
      break;
    }
    case Shape::Sech: {
      if (!(shape_param > 0.0)) throw std::invalid_argument("make_shape: sech width must be > 0");
      s = symmetric_samples(steps, [&](double x) { return 1.0 / std::cosh(x / shape_param); });
      break;
    }
    case Shape::Gaussian:
    case Shape::GaussianSquare: {
      if (!(shape_param > 0.0)) throw std::invalid_argument("make_shape: gaussian width must be > 0");
      const double flat = shape == Shape::GaussianSquare ? flat_fraction : 0.0;
      if (!(flat >= 0.0 && flat < 1.0)) {
        throw std::invalid_argument("make_shape: flat_fraction must be in [0, 1)");
      }
      s = symmetric_samples(steps, [&](double x) {
        const double ax = std::abs(x);
        if (ax <= flat) return 1.0;
        const double u = (ax - flat) / (1.0 - flat);
        return std::exp(-0.5 * u * u / (shape_param * shape_param));
      });
      break;
    }
  }
  // Normalize to unit peak (already 1 at the centre for even step counts).
  const double peak = *std::max_element(s.begin(), s.end());
  if (peak != 1.0) {
    for (double& v : s) v /= peak;
  }
  return PulseEnvelope(shape, gate_time_ns, 1.0, shape_param, step, std::move(s));
}

PulseEnvelope normalize_area(const PulseEnvelope& env, double rect_amplitude, double rect_time_ns) {
  if (std::abs(env.peak() - 1.0) > 1e-12) {
    throw std::invalid_argument("normalize_area: envelope must have unit peak");
  }
  if (std::abs(rect_time_ns - env.gate_time_ns()) > 1e-9 * env.gate_time_ns()) {
    throw std::invalid_argument("normalize_area: rect_time must equal the envelope gate time");
  }
  const double integral = env.area();
  if (!(integral > 0.0)) throw DegenerateError("normalize_area: envelope integral is zero");
  return env.scaled(rect_amplitude * rect_time_ns / integral);
}

std::vector<SpectrumPoint> spectrum(const PulseEnvelope& env, double carrier_mhz,
                                    double resolution_mhz) {
  if (!(resolution_mhz > 0.0)) throw std::invalid_argument("spectrum: resolution must be > 0");
  const auto samples = env.samples();
  const double dt_ns = env.sample_step_ns();
  const auto needed = static_cast<std::size_t>(std::ceil(1e3 / (resolution_mhz * dt_ns)));
  const std::size_t m = fft::next_pow2(std::max(needed, samples.size()));
  std::vector<std::complex<double>> buf(m);
  for (std::size_t k = 0; k < samples.size(); ++k) buf[k] = samples[k];
  fft::transform(buf);

  std::vector<double> power(m);
  double pmax = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    power[k] = std::norm(buf[k]);
    pmax = std::max(pmax, power[k]);
  }
  if (!(pmax > 0.0)) throw DegenerateError("spectrum: envelope has zero power");

  // Complex baseband modulation shifts the whole spectrum onto the carrier;
  // reorder so frequencies ascend.
  const double bin_mhz = 1e3 / (static_cast<double>(m) * dt_ns);
  std::vector<SpectrumPoint> table(m);
  const std::size_t half = m / 2;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = (i + half) % m;
    const double offset = (static_cast<double>(i) - static_cast<double>(half)) * bin_mhz;
    const double p = power[k] / pmax;
    table[i] = {carrier_mhz + offset,
                p > 0.0 ? 10.0 * std::log10(p) : -std::numeric_limits<double>::infinity()};
  }
  return table;
}

SidelobeReport analyze_sidelobes(std::span<const SpectrumPoint> table) {
  if (table.size() < 8) throw std::invalid_argument("analyze_sidelobes: table too small");
  const auto peak_it = std::max_element(table.begin(), table.end(), [](const auto& a, const auto& b) {
    return a.power_db < b.power_db;
  });
  const std::size_t peak = static_cast<std::size_t>(peak_it - table.begin());
  std::size_t right = peak;
  while (right + 1 < table.size() && table[right + 1].power_db <= table[right].power_db) ++right;
  std::size_t left = peak;
  while (left > 0 && table[left - 1].power_db <= table[left].power_db) --left;

  SidelobeReport report{-std::numeric_limits<double>::infinity(), 0.0,
                        -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i >= left && i <= right) continue;
    report.max_sidelobe_db = std::max(report.max_sidelobe_db, table[i].power_db);
  }
  // First sidelobes: the lobes immediately adjacent to the main lobe.
  auto lobe_peak = [&](std::size_t start, int dir) {
    std::size_t i = start;
    std::size_t best = start;
    while (true) {
      const std::size_t next = dir > 0 ? i + 1 : i - 1;
      if ((dir > 0 && next >= table.size()) || (dir < 0 && i == 0)) break;
      if (table[next].power_db < table[i].power_db && table[i].power_db >= table[best].power_db) {
        best = i;
        break;
      }
      i = next;
      if (table[i].power_db > table[best].power_db) best = i;
    }
    return best;
  };
  const std::size_t rl = right + 1 < table.size() ? lobe_peak(right, +1) : right;
  const std::size_t ll = left > 0 ? lobe_peak(left, -1) : left;
  const std::size_t first = table[rl].power_db >= table[ll].power_db ? rl : ll;
  report.first_sidelobe_db = table[first].power_db;
  report.first_sidelobe_offset_mhz = std::abs(table[first].freq_mhz - table[peak].freq_mhz);
  return report;
}

void write_envelope_csv(const PulseEnvelope& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t_ns,value\n" << std::setprecision(12);
  const auto s = env.samples();
  for (std::size_t k = 0; k < s.size(); ++k) {
    out << static_cast<double>(k) * env.sample_step_ns() << ',' << s[k] << '\n';
  }
}

void write_spectrum_csv(std::span<const SpectrumPoint> table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "freq_MHz,power_dB\n" << std::setprecision(10);
  for (const auto& p : table) out << p.freq_mhz << ',' << p.power_db << '\n';
}

}  // namespace spinbench::pulse
