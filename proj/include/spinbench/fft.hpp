#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace spinbench::fft {

std::size_t next_pow2(std::size_t n);

/// Forward (sign -1) or inverse (sign +1, unnormalized) complex DFT in place.
void transform(std::vector<std::complex<double>>& data, bool inverse = false);

}  // namespace spinbench::fft
