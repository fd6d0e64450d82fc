#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spinbench::readout {

enum class Parity { Even, Odd };

/// Parity readout of a PSB pair. Even parity produces the high signal
/// cluster (mean 1), odd the low one (mean 0).
struct ReadoutModel {
  double threshold = 0.5;
  double signal_width = 0.05;
  double even_to_odd = 0.0;   // even state assigned odd
  double odd_to_even = 0.0;   // odd state assigned even
  double cnot_depolarizing = 0.0;   // on the ZI mapping

  void validate() const;
};

/// Two-qubit basis probabilities ordered (up-up, up-down, down-up, down-down)
/// with the first qubit leftmost.
using PairProbabilities = std::array<double, 4>;
enum PairState : std::size_t { kUpUp = 0, kUpDown = 1, kDownUp = 2, kDownDown = 3 };

PairProbabilities product_probabilities(double p1_up, double p2_up);
Parity parity_of(PairState s);

/// Analog single-shot signal for a true parity, after assignment errors.
double parity_signal(Parity truth, const ReadoutModel& model, std::mt19937_64& rng);

/// Samples the pair, applies assignment error, thresholds the analog signal.
Parity psb_parity_shot(const PairProbabilities& probs, const ReadoutModel& model, std::mt19937_64& rng);

struct FeedbackResult {
  PairState state = kUpDown;
  bool success = false;   // confirmation measurement read odd
};

/// Parity measurement, X^2 on the second qubit when even was read,
/// confirmation measurement, then the adiabatic map of the odd subspace
/// onto up-down.
FeedbackResult feedback_initialize(const PairProbabilities& probs, const ReadoutModel& model,
                                   std::mt19937_64& rng);
/// Probability that feedback_initialize ends in up-down.
double feedback_fidelity(const PairProbabilities& probs, const ReadoutModel& model);

struct QndResult {
  bool first_read_up = false;
  bool final_up = false;   // Q3 after the conditional flips
};

/// CROT maps Q3 onto the Q1,2 parity (up -> even), which is read; a read "up"
/// triggers X^2 on Q3. Repeated `repetitions` times.
QndResult qnd_readout_q3(double p_up, const ReadoutModel& model, std::mt19937_64& rng, int repetitions = 2);
/// Probability that Q3 is left up after the repetitions.
double qnd_initialization_error(double p_up, const ReadoutModel& model, int repetitions = 2);

struct ShotPair {
  double s_zz = 0.0;
  double s_zi = 0.0;
};

/// One tomographic shot pair per repetition: each draws a pair state and
/// records its ZZ parity and, through the CNOT mapping, the first qubit's Z.
std::vector<ShotPair> tomographic_shots(double p1_up, double p2_up, std::size_t shots,
                                        const ReadoutModel& model, std::mt19937_64& rng);

struct Reconstruction {
  PairProbabilities joint{};
  double p1_up = 0.0;
  double p2_up = 0.0;
};

/// Thresholding conjunctions: up-up = ZZ high & ZI high, down-up = both low,
/// up-down = ZZ low & ZI high, down-down = ZZ high & ZI low.
Reconstruction tomographic_reconstruct(std::span<const ShotPair> shots, double threshold);

double sequence_fidelity(double p_flip, double p_noflip);

void write_shots_csv(std::span<const std::vector<ShotPair>> per_sequence, const std::string& path);

}  // namespace spinbench::readout
