#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spinbench::pulse {

enum class Shape { Rectangular, Kaiser, Sech, Gaussian, GaussianSquare };

std::string_view to_string(Shape shape);
Shape shape_from_string(std::string_view name);

inline constexpr double kDefaultSampleStepNs = 0.5;
inline constexpr double kDefaultKaiserBeta = 8.0;
// Width parameters (relative to half the gate time) for the shapes whose
// experimental values are not published.
inline constexpr double kDefaultSechWidth = 0.2;
inline constexpr double kDefaultGaussianWidth = 0.3;
inline constexpr double kDefaultFlatFraction = 0.5;

/// Modified Bessel function of the first kind, order zero (power series).
double bessel_i0(double x);

/// Baseband drive envelope sampled at t_k = k * sample_step, k = 0..N, with
/// N * sample_step == gate_time. Immutable once built.
class PulseEnvelope {
 public:
  PulseEnvelope(Shape shape, double gate_time_ns, double amplitude, double shape_param,
                double sample_step_ns, std::vector<double> samples);

  Shape shape() const { return shape_; }
  double gate_time_ns() const { return gate_time_ns_; }
  double amplitude() const { return amplitude_; }
  double shape_param() const { return shape_param_; }
  double sample_step_ns() const { return sample_step_ns_; }
  std::span<const double> samples() const { return samples_; }
  std::size_t step_count() const { return samples_.size() - 1; }

  double peak() const;
  /// Trapezoidal integral of the samples (amplitude x ns).
  double area() const;
  /// Mean of adjacent samples; the piecewise-constant drive seen by the
  /// propagator, whose sum times the step equals area().
  std::vector<double> step_values() const;

  PulseEnvelope scaled(double factor) const;

 private:
  Shape shape_;
  double gate_time_ns_;
  double amplitude_;
  double shape_param_;
  double sample_step_ns_;
  std::vector<double> samples_;
};

PulseEnvelope make_kaiser(double gate_time_ns, double beta,
                          double sample_step_ns = kDefaultSampleStepNs);

/// Unit-peak envelope of any shape. `flat_fraction` is only read for
/// GaussianSquare; `shape_param` is beta (Kaiser) or the width relative to
/// half the gate time (Sech, Gaussian, GaussianSquare ramps).
PulseEnvelope make_shape(Shape shape, double gate_time_ns, double shape_param,
                         double sample_step_ns = kDefaultSampleStepNs,
                         double flat_fraction = kDefaultFlatFraction);

double default_shape_param(Shape shape);

/// Rescales a unit-peak envelope so its area matches a rectangular pulse of
/// height rect_amplitude lasting rect_time.
PulseEnvelope normalize_area(const PulseEnvelope& env, double rect_amplitude, double rect_time_ns);

struct SpectrumPoint {
  double freq_mhz;
  double power_db;
};

/// Power spectrum of the carrier-modulated envelope, 0 dB at the peak, with
/// bins no wider than `resolution_mhz`.
std::vector<SpectrumPoint> spectrum(const PulseEnvelope& env, double carrier_mhz,
                                    double resolution_mhz);

struct SidelobeReport {
  double first_sidelobe_db;
  double first_sidelobe_offset_mhz;
  double max_sidelobe_db;
};

/// Locates the main lobe around the spectral peak (bounded by the first local
/// minima) and reports the sidelobe levels outside it.
SidelobeReport analyze_sidelobes(std::span<const SpectrumPoint> table);

void write_envelope_csv(const PulseEnvelope& env, const std::string& path);
void write_spectrum_csv(std::span<const SpectrumPoint> table, const std::string& path);

}  // namespace spinbench::pulse
