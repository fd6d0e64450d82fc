#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spinbench::noise {

/// Dephasing-noise spectrum S(f) = scale * chi * (a f^-alpha_a + b f^-alpha_b).
///
/// S is a two-sided density in Hz^2/Hz of the qubit frequency fluctuation
/// beta(t) with f in Hz, so Var(beta) = 2 * integral_0^inf S(f) df. With
/// chi = 1 this gives T2* close to 10 us for a ~15 minute Ramsey record.
struct NoiseModel {
  double psd_coeff_a = 0.25;
  double psd_exponent_a = 1.3;
  double psd_coeff_b = 1.0;
  double psd_exponent_b = 1.0;
  double overall_scale = 1e7;
  double chi = 1.0;
  // Band edges in Hz; zero means "derive from the schedule".
  double f_lf_max = 0.0;
  double f_if_max = 0.0;
  double f_hf_max = 0.0;
  double hf_update_step_ns = 10.0;
  bool lf_enabled = true;
  bool if_enabled = true;
  bool hf_enabled = true;
  std::uint64_t seed = 1;

  /// Two-sided PSD [Hz^2/Hz] including chi.
  double psd(double f_hz) const;
  /// Variance [Hz^2] of the band [f_lo, f_hi], counting both signs of f.
  double band_variance(double f_lo, double f_hi) const;
  void validate() const;
};

/// Wall-clock layout of one measured sequence: it is repeated `shots` times
/// starting at start_s, so its LF value averages over span_s.
struct ScheduledSequence {
  double start_s = 0.0;
  double span_s = 0.0;
  std::size_t gate_count = 0;
  double gate_time_ns = 0.0;
  double idle_ns = 2.0;

  double gate_period_ns() const { return gate_time_ns + idle_ns; }
};

struct ExperimentSchedule {
  std::vector<ScheduledSequence> sequences;
  double total_span_s = 0.0;

  static constexpr double kCycleTimeS = 1.75e-3;
  static constexpr double kAwgLoadS = 300.0;

  void add_dead_time(double seconds) { total_span_s += seconds; }
  /// Appends a sequence measured `shots` times at the given cycle time.
  void add_sequence(std::size_t gate_count, double gate_time_ns, std::size_t shots,
                    double cycle_s = kCycleTimeS, double idle_ns = 2.0);
};

struct BandEdges {
  double f_min = 0.0;     // 1 / total experiment span
  double f_lf_max = 0.0;
  double f_if_max = 0.0;
  double f_hf_max = 0.0;
};

/// Detuning seen by one sequence: constant LF part, one IF value per
/// primitive gate, and HF samples every hf_step_ns inside each gate. MHz.
struct SequenceNoise {
  double lf_mhz = 0.0;
  std::vector<double> if_mhz;
  std::vector<double> hf_mhz;
  std::size_t hf_per_gate = 0;
  double hf_step_ns = 0.0;

  double slow(std::size_t gate) const { return lf_mhz + (if_mhz.empty() ? 0.0 : if_mhz[gate]); }
  double at(std::size_t gate, double t_in_gate_ns) const;
};

struct NoiseTrace {
  BandEdges edges;
  std::vector<SequenceNoise> sequences;
  std::vector<double> start_s;
};

/// Stationary Gaussian process samples restricted to [f_lo, f_hi], by
/// spectral synthesis on a grid twice as long as requested (no wrap-around
/// correlation). Power below the first Fourier bin is added as a common
/// offset. Returns Hz.
std::vector<double> synthesize_band(const NoiseModel& model, double f_lo, double f_hi,
                                    double step_s, std::size_t count, std::mt19937_64& rng);

/// Splits the spectrum of one process across the schedule. The LF part comes
/// from a single realization spanning the whole experiment; the IF/HF parts
/// of sequence k are drawn from a stream derived from (seed, k), so any
/// sequence can be regenerated independently and in any order.
class NoiseSynthesizer {
 public:
  NoiseSynthesizer(NoiseModel model, const ExperimentSchedule& schedule);

  const BandEdges& edges() const { return edges_; }
  std::size_t size() const { return sequences_.size(); }
  double lf_mhz(std::size_t k) const { return lf_mhz_.at(k); }
  SequenceNoise sequence(std::size_t k) const;
  const NoiseModel& model() const { return model_; }

 private:
  NoiseModel model_;
  std::vector<ScheduledSequence> sequences_;
  BandEdges edges_;
  std::vector<double> lf_mhz_;
};

NoiseTrace synthesize(const NoiseModel& model, const ExperimentSchedule& schedule);

/// Per-shot quasi-static detunings [MHz] for a record of `shots` repetitions
/// spaced `cycle_s` apart, covering frequencies up to f_upper_hz.
std::vector<double> quasi_static_shots(const NoiseModel& model, std::size_t shots, double cycle_s,
                                       double f_upper_hz, std::uint64_t seed);

/// T2* implied by Gaussian quasi-static noise of standard deviation sigma.
double t2_star_from_sigma_us(double sigma_mhz);

struct Periodogram {
  std::vector<double> freq_hz;
  std::vector<double> psd;   // two-sided, Hz^2/Hz for a trace in Hz
  bool degenerate = false;   // all-zero input: every bin is -inf dB
};

/// Welch estimate (Hann window, 50 % overlap, mean removed per segment),
/// reported in the same two-sided convention as NoiseModel::psd.
Periodogram verify_psd(std::span<const double> trace, double dt_s, std::size_t segment_length = 0);

/// Averages periodogram bins into logarithmically spaced bands.
Periodogram log_bin(const Periodogram& p, double f_lo, double f_hi, int bins_per_decade);

void write_trace_csv(const SequenceNoise& noise, double gate_period_ns, const std::string& path);

}  // namespace spinbench::noise
