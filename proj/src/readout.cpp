#include "spinbench/readout.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace spinbench::readout {

namespace {

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

PairState sample_pair(const PairProbabilities& probs, std::mt19937_64& rng) {
  const double u = uniform(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<PairState>(k);
  }
  return kDownDown;
}

void check_probs(const PairProbabilities& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("pair probabilities must lie in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("pair probabilities must sum to 1");
}

}  // namespace

void ReadoutModel::validate() const {
  if (!(even_to_odd >= 0.0 && even_to_odd < 0.5) || !(odd_to_even >= 0.0 && odd_to_even < 0.5)) {
    throw std::invalid_argument("readout: assignment errors must lie in [0, 0.5)");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("readout: threshold must lie between the signal means 0 and 1");
  }
  if (!(signal_width >= 0.0)) throw std::invalid_argument("readout: signal width must be >= 0");
  if (!(cnot_depolarizing >= 0.0 && cnot_depolarizing <= 1.0)) {
    throw std::invalid_argument("readout: CNOT depolarizing must lie in [0, 1]");
  }
}

PairProbabilities product_probabilities(double p1_up, double p2_up) {
  if (!(p1_up >= 0.0 && p1_up <= 1.0) || !(p2_up >= 0.0 && p2_up <= 1.0)) {
    throw std::invalid_argument("qubit probabilities must lie in [0, 1]");
  }
  return {p1_up * p2_up, p1_up * (1.0 - p2_up), (1.0 - p1_up) * p2_up, (1.0 - p1_up) * (1.0 - p2_up)};
}

Parity parity_of(PairState s) { return (s == kUpUp || s == kDownDown) ? Parity::Even : Parity::Odd; }

double parity_signal(Parity truth, const ReadoutModel& model, std::mt19937_64& rng) {
  const double e = truth == Parity::Even ? model.even_to_odd : model.odd_to_even;
  const double flip_draw = uniform(rng);
  Parity assigned = truth;
  if (flip_draw < e) assigned = truth == Parity::Even ? Parity::Odd : Parity::Even;
  const double mean = assigned == Parity::Even ? 1.0 : 0.0;
  const double g = std::normal_distribution<double>(0.0, 1.0)(rng);
  return mean + model.signal_width * g;
}

Parity psb_parity_shot(const PairProbabilities& probs, const ReadoutModel& model, std::mt19937_64& rng) {
  check_probs(probs);
  const PairState s = sample_pair(probs, rng);
  return parity_signal(parity_of(s), model, rng) > model.threshold ? Parity::Even : Parity::Odd;
}

FeedbackResult feedback_initialize(const PairProbabilities& probs, const ReadoutModel& model,
                                   std::mt19937_64& rng) {
  check_probs(probs);
  PairState s = sample_pair(probs, rng);
  const bool read_even = parity_signal(parity_of(s), model, rng) > model.threshold;
  if (read_even) {
    // X^2 on the second qubit swaps the parity subspaces.
    static constexpr PairState flip_second[4] = {kUpDown, kUpUp, kDownDown, kDownUp};
    s = flip_second[s];
  }
  FeedbackResult r;
  r.success = parity_signal(parity_of(s), model, rng) <= model.threshold;
  r.state = parity_of(s) == Parity::Odd ? kUpDown : s;
  return r;
}

double feedback_fidelity(const PairProbabilities& probs, const ReadoutModel& model) {
  check_probs(probs);
  const double q_odd = probs[kUpDown] + probs[kDownUp];
  return 1.0 - (q_odd * model.odd_to_even + (1.0 - q_odd) * model.even_to_odd);
}

QndResult qnd_readout_q3(double p_up, const ReadoutModel& model, std::mt19937_64& rng, int repetitions) {
  if (!(p_up >= 0.0 && p_up <= 1.0)) throw std::invalid_argument("qnd: p_up must lie in [0, 1]");
  if (repetitions < 1) throw std::invalid_argument("qnd: repetitions must be >= 1");
  QndResult r;
  bool up = uniform(rng) < p_up;
  for (int k = 0; k < repetitions; ++k) {
    const bool read_up = parity_signal(up ? Parity::Even : Parity::Odd, model, rng) > model.threshold;
    if (k == 0) r.first_read_up = read_up;
    if (read_up) up = !up;
  }
  r.final_up = up;
  return r;
}

double qnd_initialization_error(double p_up, const ReadoutModel& model, int repetitions) {
  if (repetitions < 1) throw std::invalid_argument("qnd: repetitions must be >= 1");
  double err = p_up;
  for (int k = 0; k < repetitions; ++k) {
    // Up stays up when misread as down; down is flipped up when misread as up.
    err = err * model.even_to_odd + (1.0 - err) * model.odd_to_even;
  }
  return err;
}

std::vector<ShotPair> tomographic_shots(double p1_up, double p2_up, std::size_t shots,
                                        const ReadoutModel& model, std::mt19937_64& rng) {
  const auto probs = product_probabilities(p1_up, p2_up);
  std::vector<ShotPair> out(shots);
  for (auto& shot : out) {
    const PairState s = sample_pair(probs, rng);
    shot.s_zz = parity_signal(parity_of(s), model, rng);
    // The CNOT maps ZZ onto ZI: even after mapping <=> first qubit up.
    bool first_up = s == kUpUp || s == kUpDown;
    if (model.cnot_depolarizing > 0.0 && uniform(rng) < model.cnot_depolarizing) first_up = uniform(rng) < 0.5;
    shot.s_zi = parity_signal(first_up ? Parity::Even : Parity::Odd, model, rng);
  }
  return out;
}

Reconstruction tomographic_reconstruct(std::span<const ShotPair> shots, double threshold) {
  if (shots.empty()) throw std::invalid_argument("tomographic_reconstruct: empty-shot-list");
  std::array<std::size_t, 4> counts{};
  for (const auto& s : shots) {
    const bool zz = s.s_zz > threshold;
    const bool zi = s.s_zi > threshold;
    if (zz && zi) {
      ++counts[kUpUp];
    } else if (!zz && !zi) {
      ++counts[kDownUp];
    } else if (!zz && zi) {
      ++counts[kUpDown];
    } else {
      ++counts[kDownDown];
    }
  }
  Reconstruction r;
  const double n = static_cast<double>(shots.size());
  for (std::size_t k = 0; k < 4; ++k) r.joint[k] = static_cast<double>(counts[k]) / n;
  r.p1_up = r.joint[kUpDown] + r.joint[kUpUp];
  r.p2_up = r.joint[kDownUp] + r.joint[kUpUp];
  return r;
}

double sequence_fidelity(double p_flip, double p_noflip) {
  if (!(p_flip >= 0.0 && p_flip <= 1.0) || !(p_noflip >= 0.0 && p_noflip <= 1.0)) {
    throw std::invalid_argument("sequence_fidelity: probabilities must lie in [0, 1]");
  }
  return std::abs(p_flip - p_noflip);
}

void write_shots_csv(std::span<const std::vector<ShotPair>> per_sequence, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "sequence_id,basis,s_value\n";
  for (std::size_t k = 0; k < per_sequence.size(); ++k) {
    for (const auto& s : per_sequence[k]) out << k << ",ZZ," << s.s_zz << '\n' << k << ",ZI," << s.s_zi << '\n';
  }
}

}  // namespace spinbench::readout
