#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace spinbench::fit {

using ModelFn = std::function<double(double x, const Eigen::VectorXd& params)>;

struct CurveFit {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;   // scaled by the reduced chi^2
  double chi2 = 0.0;
  std::vector<double> residuals;
  int evaluations = 0;

  double stderr_of(Eigen::Index i) const { return std::sqrt(std::max(0.0, covariance(i, i))); }
};

/// Levenberg-Marquardt least squares of y ~ model(x, p). `sigma` may be
/// empty (unit weights). Throws FitError on non-finite output or failure.
CurveFit curve_fit(const ModelFn& model, std::span<const double> x, std::span<const double> y,
                   std::span<const double> sigma, Eigen::VectorXd p0);

/// F(n) = A p^n fitted as a weighted line in log space.
struct DecayFit {
  double amplitude = 0.0;
  double p = 0.0;
  double sigma_amplitude = 0.0;
  double sigma_p = 0.0;
  double cov_amplitude_p = 0.0;
  std::size_t points_used = 0;
};

/// Points with F <= 3 sigma are dropped; weights are F^2/sigma^2 so each
/// log-point counts by its relative precision. Zero sigmas are floored.
DecayFit fit_exponential_decay(std::span<const double> n, std::span<const double> f,
                               std::span<const double> sigma);

/// Straight line y = a + b x with optional weights 1/sigma^2.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double sigma_intercept = 0.0;
  double sigma_slope = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {});

}  // namespace spinbench::fit
