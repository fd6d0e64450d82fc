#include "spinbench/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spinbench/common.hpp"
#include "spinbench/fft.hpp"

namespace spinbench::noise {

namespace {

double power_law_integral(double coeff, double exponent, double f1, double f2) {
  if (coeff == 0.0 || f2 <= f1) return 0.0;
  if (std::abs(exponent - 1.0) < 1e-12) return coeff * std::log(f2 / f1);
  const double e = 1.0 - exponent;
  return coeff * (std::pow(f2, e) - std::pow(f1, e)) / e;
}

constexpr double kHzToMhz = 1e-6;

}  // namespace

double NoiseModel::psd(double f_hz) const {
  if (!(f_hz > 0.0)) throw std::invalid_argument("NoiseModel::psd: f must be > 0");
  return overall_scale * chi *
         (psd_coeff_a * std::pow(f_hz, -psd_exponent_a) + psd_coeff_b * std::pow(f_hz, -psd_exponent_b));
}

double NoiseModel::band_variance(double f_lo, double f_hi) const {
  if (!(f_lo > 0.0)) throw std::invalid_argument("band_variance: lower edge must be > 0");
  if (f_hi <= f_lo) return 0.0;
  return 2.0 * overall_scale * chi *
         (power_law_integral(psd_coeff_a, psd_exponent_a, f_lo, f_hi) +
          power_law_integral(psd_coeff_b, psd_exponent_b, f_lo, f_hi));
}

void NoiseModel::validate() const {
  if (!(chi >= 0.0) || !std::isfinite(chi)) throw std::invalid_argument("NoiseModel: chi must be >= 0");
  if (psd_coeff_a < 0.0 || psd_coeff_b < 0.0 || !(overall_scale > 0.0) ||
      (psd_coeff_a == 0.0 && psd_coeff_b == 0.0)) {
    throw std::invalid_argument("NoiseModel: psd-nonpositive");
  }
  if (!(hf_update_step_ns > 0.0)) throw std::invalid_argument("NoiseModel: hf_update_step must be > 0");
  const double e[3] = {f_lf_max, f_if_max, f_hf_max};
  for (int i = 0; i < 3; ++i) {
    if (e[i] < 0.0) throw std::invalid_argument("NoiseModel: band edges must be >= 0");
  }
  if (f_lf_max > 0.0 && f_if_max > 0.0 && f_if_max <= f_lf_max) {
    throw std::invalid_argument("NoiseModel: band edges must increase");
  }
  if (f_if_max > 0.0 && f_hf_max > 0.0 && f_hf_max <= f_if_max) {
    throw std::invalid_argument("NoiseModel: band edges must increase");
  }
}

void ExperimentSchedule::add_sequence(std::size_t gate_count, double gate_time_ns, std::size_t shots,
                                      double cycle_s, double idle_ns) {
  if (shots == 0 || !(cycle_s > 0.0)) throw std::invalid_argument("schedule: shots and cycle must be > 0");
  ScheduledSequence s;
  s.start_s = total_span_s;
  s.span_s = static_cast<double>(shots) * cycle_s;
  s.gate_count = gate_count;
  s.gate_time_ns = gate_time_ns;
  s.idle_ns = idle_ns;
  sequences.push_back(s);
  total_span_s += s.span_s;
}

double SequenceNoise::at(std::size_t gate, double t_in_gate_ns) const {
  double v = slow(gate);
  if (!hf_mhz.empty()) {
    auto k = static_cast<std::size_t>(std::max(0.0, t_in_gate_ns) / hf_step_ns);
    k = std::min(k, hf_per_gate - 1);
    v += hf_mhz[gate * hf_per_gate + k];
  }
  return v;
}

std::vector<double> synthesize_band(const NoiseModel& model, double f_lo, double f_hi,
                                    double step_s, std::size_t count, std::mt19937_64& rng) {
  std::vector<double> out(count, 0.0);
  if (count == 0 || model.chi == 0.0 || f_hi <= f_lo) return out;
  if (!(f_lo > 0.0) || !(step_s > 0.0)) throw std::invalid_argument("synthesize_band: bad band or step");
  const std::size_t m = fft::next_pow2(std::max<std::size_t>(2 * count, 64));
  const double df = 1.0 / (static_cast<double>(m) * step_s);
  std::normal_distribution<double> gauss;

  std::vector<std::complex<double>> spec(m);
  for (std::size_t k = 1; k <= m / 2; ++k) {
    const double fk = static_cast<double>(k) * df;
    const double lo = std::max(f_lo, fk - 0.5 * df);
    const double hi = std::min(f_hi, fk + 0.5 * df);
    // Draw unconditionally so the random stream does not depend on the band.
    const double ga = gauss(rng);
    const double gb = gauss(rng);
    if (hi <= lo) continue;
    const double sigma = std::sqrt(model.band_variance(lo, hi));
    if (k == m / 2) {
      spec[k] = sigma * ga;
    } else {
      spec[k] = 0.5 * sigma * std::complex<double>(ga, -gb);
      spec[m - k] = std::conj(spec[k]);
    }
  }
  fft::transform(spec, /*inverse=*/true);
  double offset = 0.0;
  const double offset_hi = std::min(f_hi, 0.5 * df);
  const double g0 = gauss(rng);
  if (offset_hi > f_lo) offset = std::sqrt(model.band_variance(f_lo, offset_hi)) * g0;
  for (std::size_t n = 0; n < count; ++n) out[n] = spec[n].real() + offset;
  return out;
}

NoiseSynthesizer::NoiseSynthesizer(NoiseModel model, const ExperimentSchedule& schedule)
    : model_(model), sequences_(schedule.sequences) {
  model_.validate();
  if (sequences_.empty()) throw std::invalid_argument("synthesize: schedule-empty");
  if (!(schedule.total_span_s > 0.0)) throw std::invalid_argument("synthesize: schedule has zero span");

  double min_span = std::numeric_limits<double>::infinity();
  double max_period = 0.0;
  double min_gate = std::numeric_limits<double>::infinity();
  for (const auto& s : sequences_) {
    if (!(s.span_s > 0.0) || !(s.gate_time_ns > 0.0)) {
      throw std::invalid_argument("synthesize: sequence needs positive span and gate time");
    }
    min_span = std::min(min_span, s.span_s);
    max_period = std::max(max_period, s.gate_period_ns());
    min_gate = std::min(min_gate, s.gate_time_ns);
  }
  edges_.f_min = 1.0 / schedule.total_span_s;
  edges_.f_lf_max = model_.f_lf_max > 0.0 ? model_.f_lf_max : 1.0 / min_span;
  edges_.f_if_max = model_.f_if_max > 0.0 ? model_.f_if_max : 0.5 / (max_period * 1e-9);
  edges_.f_hf_max = model_.f_hf_max > 0.0 ? model_.f_hf_max : 0.5 / (model_.hf_update_step_ns * 1e-9);
  (void)min_gate;

  // One realization of the slow process across the whole experiment, sampled
  // four times per shortest sequence span; each LF value is its mean over the
  // sequence's span.
  lf_mhz_.assign(sequences_.size(), 0.0);
  if (model_.lf_enabled && edges_.f_lf_max > edges_.f_min) {
    const double step = min_span / 4.0;
    const auto count = static_cast<std::size_t>(std::ceil(schedule.total_span_s / step)) + 1;
    std::mt19937_64 rng(derive_seed(model_.seed, 0x4c46));
    const auto coarse = synthesize_band(model_, edges_.f_min, edges_.f_lf_max, step, count, rng);
    for (std::size_t k = 0; k < sequences_.size(); ++k) {
      const auto& s = sequences_[k];
      auto first = static_cast<std::size_t>(std::floor(s.start_s / step));
      auto last = static_cast<std::size_t>(std::ceil((s.start_s + s.span_s) / step));
      last = std::min(last, count - 1);
      first = std::min(first, last);
      double sum = 0.0;
      for (std::size_t n = first; n <= last; ++n) sum += coarse[n];
      lf_mhz_[k] = kHzToMhz * sum / static_cast<double>(last - first + 1);
    }
  }
}

SequenceNoise NoiseSynthesizer::sequence(std::size_t k) const {
  const auto& s = sequences_.at(k);
  SequenceNoise out;
  out.lf_mhz = lf_mhz_[k];
  std::mt19937_64 rng(derive_seed(model_.seed, 0x4946, k));
  if (model_.if_enabled) {
    const double step = s.gate_period_ns() * 1e-9;
    out.if_mhz = synthesize_band(model_, edges_.f_lf_max, edges_.f_if_max, step, s.gate_count, rng);
    for (double& v : out.if_mhz) v *= kHzToMhz;
  }
  if (model_.hf_enabled && model_.chi > 0.0 && edges_.f_hf_max > edges_.f_if_max) {
    out.hf_step_ns = model_.hf_update_step_ns;
    out.hf_per_gate = static_cast<std::size_t>(std::ceil(s.gate_time_ns / out.hf_step_ns - 1e-9));
    out.hf_per_gate = std::max<std::size_t>(out.hf_per_gate, 1);
    // White approximation of everything above the IF band, at the level the
    // spectrum has where the IF band ends.
    const double sigma_hz =
        std::sqrt(2.0 * model_.psd(edges_.f_if_max) * (edges_.f_hf_max - edges_.f_if_max));
    std::mt19937_64 hf_rng(derive_seed(model_.seed, 0x4846, k));
    std::normal_distribution<double> gauss(0.0, sigma_hz * kHzToMhz);
    out.hf_mhz.resize(s.gate_count * out.hf_per_gate);
    for (double& v : out.hf_mhz) v = gauss(hf_rng);
  }
  return out;
}

NoiseTrace synthesize(const NoiseModel& model, const ExperimentSchedule& schedule) {
  NoiseSynthesizer synth(model, schedule);
  NoiseTrace trace;
  trace.edges = synth.edges();
  trace.sequences.reserve(synth.size());
  for (std::size_t k = 0; k < synth.size(); ++k) {
    trace.sequences.push_back(synth.sequence(k));
    trace.start_s.push_back(schedule.sequences[k].start_s);
  }
  return trace;
}

std::vector<double> quasi_static_shots(const NoiseModel& model, std::size_t shots, double cycle_s,
                                       double f_upper_hz, std::uint64_t seed) {
  model.validate();
  if (shots == 0 || !(cycle_s > 0.0)) throw std::invalid_argument("quasi_static_shots: bad record");
  std::mt19937_64 rng(derive_seed(seed, 0x5153));
  const double f_lo = 1.0 / (static_cast<double>(shots) * cycle_s);
  const double f_nyq = 0.5 / cycle_s;
  auto out = synthesize_band(model, f_lo, std::min(f_nyq, f_upper_hz), cycle_s, shots, rng);
  // Components faster than the shot cadence but slower than f_upper are
  // constant within a shot and independent between shots.
  const double fast_sigma = f_upper_hz > f_nyq ? std::sqrt(model.band_variance(f_nyq, f_upper_hz)) : 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : out) {
    const double g = gauss(rng);
    v = (v + fast_sigma * g) * kHzToMhz;
  }
  return out;
}

double t2_star_from_sigma_us(double sigma_mhz) {
  if (!(sigma_mhz > 0.0)) return std::numeric_limits<double>::infinity();
  return std::numbers::sqrt2 / (kTwoPi * sigma_mhz);
}

Periodogram verify_psd(std::span<const double> trace, double dt_s, std::size_t segment_length) {
  constexpr std::size_t kMinSamples = std::size_t{1} << 16;
  if (trace.size() < kMinSamples) throw std::invalid_argument("verify_psd: too-short (need >= 2^16 samples)");
  if (!(dt_s > 0.0)) throw std::invalid_argument("verify_psd: dt must be > 0");
  std::size_t nseg = segment_length;
  if (nseg == 0) nseg = std::max<std::size_t>(256, fft::next_pow2(trace.size() / 16));
  nseg = std::min(nseg, trace.size());

  std::vector<double> window(nseg);
  double wsum2 = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(nseg));
    wsum2 += window[i] * window[i];
  }
  const std::size_t hop = std::max<std::size_t>(1, nseg / 2);
  const std::size_t nfreq = nseg / 2 + 1;
  std::vector<double> acc(nfreq, 0.0);
  std::size_t segments = 0;
  std::vector<std::complex<double>> buf(nseg);
  for (std::size_t start = 0; start + nseg <= trace.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) mean += trace[start + i];
    mean /= static_cast<double>(nseg);
    for (std::size_t i = 0; i < nseg; ++i) buf[i] = (trace[start + i] - mean) * window[i];
    fft::transform(buf);
    for (std::size_t k = 0; k < nfreq; ++k) acc[k] += std::norm(buf[k]);
    ++segments;
  }
  Periodogram p;
  p.freq_hz.resize(nfreq);
  p.psd.resize(nfreq);
  const double scale = dt_s / (wsum2 * static_cast<double>(segments));
  bool any = false;
  for (std::size_t k = 0; k < nfreq; ++k) {
    p.freq_hz[k] = static_cast<double>(k) / (static_cast<double>(nseg) * dt_s);
    p.psd[k] = acc[k] * scale;
    any = any || p.psd[k] > 0.0;
  }
  p.degenerate = !any;
  return p;
}

Periodogram log_bin(const Periodogram& p, double f_lo, double f_hi, int bins_per_decade) {
  if (!(f_lo > 0.0) || f_hi <= f_lo || bins_per_decade <= 0) {
    throw std::invalid_argument("log_bin: bad range");
  }
  Periodogram out;
  out.degenerate = p.degenerate;
  const int nbins = static_cast<int>(std::ceil(std::log10(f_hi / f_lo) * bins_per_decade - 1e-9));
  for (int b = 0; b < nbins; ++b) {
    const double lo = f_lo * std::pow(10.0, static_cast<double>(b) / bins_per_decade);
    const double hi = std::min(f_hi, f_lo * std::pow(10.0, static_cast<double>(b + 1) / bins_per_decade));
    double sum = 0.0;
    double fsum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 1; k < p.freq_hz.size(); ++k) {
      if (p.freq_hz[k] >= lo && p.freq_hz[k] < hi) {
        sum += p.psd[k];
        fsum += std::log(p.freq_hz[k]);
        ++n;
      }
    }
    if (n == 0) continue;
    out.freq_hz.push_back(std::exp(fsum / static_cast<double>(n)));
    out.psd.push_back(sum / static_cast<double>(n));
  }
  return out;
}

void write_trace_csv(const SequenceNoise& noise, double gate_period_ns, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "gate,t_mid_ns,lf_MHz,if_MHz\n" << std::setprecision(10);
  for (std::size_t g = 0; g < noise.if_mhz.size(); ++g) {
    out << g << ',' << (static_cast<double>(g) + 0.5) * gate_period_ns << ',' << noise.lf_mhz << ','
        << noise.if_mhz[g] << '\n';
  }
}

}  // namespace spinbench::noise
