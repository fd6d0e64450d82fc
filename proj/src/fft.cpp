#include "spinbench/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace spinbench::fft {

namespace {
// FFTW's planner is not re-entrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void transform(std::vector<std::complex<double>>& data, bool inverse) {
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("fft: planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace spinbench::fft
