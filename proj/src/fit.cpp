#include "spinbench/fit.hpp"

#include <cmath>
#include <limits>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "spinbench/common.hpp"

namespace spinbench::fit {

namespace {

struct Residuals {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const ModelFn* model;
  std::span<const double> x, y, sigma;
  Eigen::Index n_params;
  mutable int evaluations = 0;

  int inputs() const { return static_cast<int>(n_params); }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    ++evaluations;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double w = sigma.empty() ? 1.0 : 1.0 / sigma[i];
      r[static_cast<Eigen::Index>(i)] = ((*model)(x[i], p) - y[i]) * w;
    }
    return 0;
  }
};

}  // namespace

CurveFit curve_fit(const ModelFn& model, std::span<const double> x, std::span<const double> y,
                   std::span<const double> sigma, Eigen::VectorXd p0) {
  const auto n = x.size();
  const auto k = static_cast<std::size_t>(p0.size());
  if (y.size() != n || (!sigma.empty() && sigma.size() != n)) {
    throw std::invalid_argument("curve_fit: x, y and sigma must have equal length");
  }
  if (n < k + 1) throw FitError("curve_fit: fewer points than parameters + 1");
  for (double s : sigma) {
    if (!(s > 0.0)) throw std::invalid_argument("curve_fit: sigma must be > 0");
  }

  Residuals f{&model, x, y, sigma, p0.size()};
  Eigen::NumericalDiff<Residuals> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals>> lm(nd);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  const auto status = lm.minimize(p0);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !p0.allFinite()) {
    throw FitError("curve_fit: optimizer failed");
  }

  CurveFit out;
  out.params = p0;
  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  nd(p0, r);
  out.chi2 = r.squaredNorm();
  out.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.residuals[i] = model(x[i], p0) - y[i];
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), p0.size());
  nd.df(p0, jac);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const double dof = static_cast<double>(n - k);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  out.covariance = cod.pseudoInverse() * (out.chi2 / dof);
  out.evaluations = f.evaluations;
  if (!std::isfinite(out.chi2)) throw FitError("curve_fit: non-finite residuals");
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (y.size() != n || (!sigma.empty() && sigma.size() != n)) {
    throw std::invalid_argument("fit_line: length mismatch");
  }
  if (n < 2) throw FitError("fit_line: need at least two points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw FitError("fit_line: degenerate abscissae");
  LineFit out;
  out.slope = (sw * sxy - sx * sy) / det;
  out.intercept = (sxx * sy - sx * sxy) / det;
  double scale = 1.0;
  if (sigma.empty()) {
    // Unit weights: estimate the noise from the scatter.
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y[i] - out.intercept - out.slope * x[i];
      ss += d * d;
    }
    scale = n > 2 ? ss / static_cast<double>(n - 2) : 0.0;
  }
  out.sigma_slope = std::sqrt(scale * sw / det);
  out.sigma_intercept = std::sqrt(scale * sxx / det);
  return out;
}

DecayFit fit_exponential_decay(std::span<const double> n, std::span<const double> f,
                               std::span<const double> sigma) {
  if (n.size() != f.size() || n.size() != sigma.size()) {
    throw std::invalid_argument("fit_exponential_decay: length mismatch");
  }
  double smax = 0.0;
  for (double s : sigma) {
    if (!(s >= 0.0)) throw std::invalid_argument("fit_exponential_decay: sigma must be >= 0");
    smax = std::max(smax, s);
  }
  const double floor = std::max(1e-9, 1e-6 * smax);
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double s = std::max(sigma[i], floor);
    if (!(f[i] > 3.0 * s)) continue;
    xs.push_back(n[i]);
    ys.push_back(std::log(f[i]));
    ws.push_back(s / f[i]);
  }
  if (xs.size() < 2) throw FitError("fit_exponential_decay: fewer than two points above 3 sigma");
  const LineFit line = fit_line(xs, ys, ws);
  DecayFit out;
  out.points_used = xs.size();
  out.amplitude = std::exp(line.intercept);
  out.p = std::exp(line.slope);
  out.sigma_amplitude = out.amplitude * line.sigma_intercept;
  out.sigma_p = out.p * line.sigma_slope;
  // cov(a, b) of the weighted line, mapped through exp.
  double sw = 0, sx = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = 1.0 / (ws[i] * ws[i]);
    sw += w;
    sx += w * xs[i];
    sxx += w * xs[i] * xs[i];
  }
  out.cov_amplitude_p = out.amplitude * out.p * (-sx / (sw * sxx - sx * sx));
  return out;
}

}  // namespace spinbench::fit
