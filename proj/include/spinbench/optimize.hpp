#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spinbench::optimize {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
  double initial_step = 0.01;     // relative size of the starting simplex
  double threshold = 0.01;        // stop once the best value is below
  std::size_t max_iterations = 50;
  double min_relative_size = 1e-6;   // simplex collapse triggers a restart
};

struct NelderMeadStep {
  std::size_t iteration = 0;
  std::vector<double> best;
  double value = 0.0;
};

struct NelderMeadResult {
  std::vector<double> best;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t restarts = 0;
  bool converged = false;
  std::vector<NelderMeadStep> trace;   // best vertex after each iteration
};

/// Simplex minimization. A collapsed simplex is rebuilt around the best
/// vertex after re-measuring it, so a lucky noisy evaluation cannot pin the
/// search.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace spinbench::optimize
