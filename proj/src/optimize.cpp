#include "spinbench/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spinbench::optimize {

namespace {

struct Vertex {
  std::vector<double> x;
  double f = 0.0;
};

std::vector<double> affine(const std::vector<double>& a, const std::vector<double>& b, double t) {
  // a + t (b - a)
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");
  if (!(opt.initial_step > 0.0)) throw std::invalid_argument("nelder_mead: initial step must be > 0");

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };

  double step = opt.initial_step;
  auto build = [&](const Vertex& centre) {
    std::vector<Vertex> s{centre};
    for (std::size_t i = 0; i < n; ++i) {
      Vertex v{centre.x, 0.0};
      v.x[i] += v.x[i] != 0.0 ? step * v.x[i] : step;
      v.f = eval(v.x);
      s.push_back(std::move(v));
    }
    return s;
  };

  Vertex start{x0, eval(x0)};
  res.best = start.x;
  res.value = start.f;
  res.trace.push_back({0, res.best, res.value});
  if (res.value < opt.threshold) {
    res.converged = true;
    return res;
  }
  std::vector<Vertex> simplex = build(start);

  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    std::sort(simplex.begin(), simplex.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k].x[i] / static_cast<double>(n);
    }
    Vertex& worst = simplex[n];
    Vertex refl{affine(centroid, worst.x, -1.0), 0.0};
    refl.f = eval(refl.x);
    if (refl.f < simplex[0].f) {
      Vertex exp{affine(centroid, worst.x, -2.0), 0.0};
      exp.f = eval(exp.x);
      worst = exp.f < refl.f ? exp : refl;
    } else if (refl.f < simplex[n - 1].f) {
      worst = refl;
    } else {
      const bool outside = refl.f < worst.f;
      Vertex con{affine(centroid, outside ? refl.x : worst.x, 0.5), 0.0};
      con.f = eval(con.x);
      if (con.f < std::min(refl.f, worst.f)) {
        worst = con;
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          simplex[k].x = affine(simplex[0].x, simplex[k].x, 0.5);
          simplex[k].f = eval(simplex[k].x);
        }
      }
    }
    const auto best_it = std::min_element(simplex.begin(), simplex.end(),
                                          [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    res.iterations = it;
    res.best = best_it->x;
    res.value = best_it->f;
    res.trace.push_back({it, res.best, res.value});
    if (res.value < opt.threshold) {
      res.converged = true;
      return res;
    }
    // Relative simplex diameter.
    double size = 0.0;
    for (const auto& v : simplex) {
      for (std::size_t i = 0; i < n; ++i) {
        const double scale = std::max(std::abs(best_it->x[i]), 1e-300);
        size = std::max(size, std::abs(v.x[i] - best_it->x[i]) / scale);
      }
    }
    if (size < opt.min_relative_size) {
      Vertex centre{best_it->x, eval(best_it->x)};
      step = std::max(opt.initial_step * 0.1, 10.0 * opt.min_relative_size);
      simplex = build(centre);
      ++res.restarts;
    }
  }
  return res;
}

}  // namespace spinbench::optimize
