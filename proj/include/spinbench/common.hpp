#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spinbench {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Frequencies are carried in MHz and durations in ns throughout; their
// product needs this factor to become a number of cycles.
inline constexpr double kMhzNs = 1e-3;

/// Numerical result is meaningless (zero-area pulse, flat spectrum, ...).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A curve fit did not converge or had insufficient usable data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// splitmix64 finalizer; used to derive independent per-task RNG seeds so a
// Monte-Carlo task draws the same numbers no matter which worker runs it.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
  return mix64(seed ^ mix64(a + 0x632be59bd9b4e019ULL));
}

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, Rest... rest) {
  return derive_seed(derive_seed(seed, a), static_cast<std::uint64_t>(rest)...);
}

}  // namespace spinbench
