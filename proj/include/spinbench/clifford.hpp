#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "spinbench/device_model.hpp"

namespace spinbench::clifford {

using device::SU2;

/// pi/2 rotation about x or y; Z rotations are frame updates, never pulses.
enum class Axis : std::uint8_t { X = 0, Y = 1 };

struct PrimitiveGate {
  Axis axis = Axis::X;
  double phase_offset_rad = 0.0;
};

/// Drive phase that realizes the axis: X at 0, Y at pi/2.
double axis_phase(Axis axis);
/// exp(-i pi/4 sigma_axis).
SU2 primitive_unitary(Axis axis);
/// Product of a word applied left to right (first letter acts first).
SU2 word_unitary(std::span<const Axis> word);
std::vector<Axis> parse_word(std::string_view word);
std::string format_word(std::span<const Axis> word);

/// |Tr(A^dagger B)| / 2; equals 1 iff A and B agree up to a global phase.
double trace_fidelity(const SU2& a, const SU2& b);

struct CliffordElement {
  int index = 0;
  std::string word;
  std::vector<Axis> decomposition;
  SU2 matrix;
};

inline constexpr std::size_t kGroupSize = 24;
inline constexpr int kIdentity = 0;   // realized as XXXX
inline constexpr int kFlip = 6;       // XX

/// The 24 single-qubit Cliffords as words over {X, Y}.
std::vector<CliffordElement> build_gate_set();

/// Gate set plus its multiplication and inverse tables.
class CliffordGroup {
 public:
  CliffordGroup();
  static const CliffordGroup& instance();

  const CliffordElement& element(int index) const { return elements_.at(static_cast<std::size_t>(index)); }
  const std::vector<CliffordElement>& elements() const { return elements_; }
  /// Index of element(later) * element(earlier), i.e. `earlier` acts first.
  int compose(int earlier, int later) const { return compose_[earlier][later]; }
  int inverse(int index) const { return inverse_[index]; }
  /// Index of the element equal to u up to global phase; throws if u is not a Clifford.
  int find(const SU2& u, double tol = 1e-9) const;

 private:
  std::vector<CliffordElement> elements_;
  std::array<std::array<int, kGroupSize>, kGroupSize> compose_{};
  std::array<int, kGroupSize> inverse_{};
};

enum class Outcome : std::uint8_t { Identity, Flip };

/// Randomized program for one qubit. The net operation of cliffords (each
/// optionally followed by the interleaved word) and then the recovery is
/// the identity or X^2, per `outcome`.
struct CliffordSequence {
  int qubit = 0;
  double gate_time_ns = 0.0;
  std::vector<int> cliffords;
  std::vector<Axis> interleaved;   // empty for standard RB
  int recovery = kIdentity;
  Outcome outcome = Outcome::Identity;

  std::size_t length() const { return cliffords.size(); }
  /// Flattened primitive schedule in time order, recovery included.
  std::vector<Axis> primitives() const;
  std::size_t primitive_count() const;
};

/// Recomputes seq.recovery from its cliffords, interleaved word and outcome.
void assign_recovery(CliffordSequence& seq);

CliffordSequence random_sequence(std::size_t n, std::mt19937_64& rng, Outcome outcome,
                                 int qubit = 0, double gate_time_ns = 0.0);

/// Inserts `word` after every Clifford and recomputes the recovery.
CliffordSequence interleave(CliffordSequence seq, std::span<const Axis> word);

/// Cycle-synchronized multi-qubit program. gates[c][q] is the primitive that
/// qubit slot q plays in cycle c, or -1 when it idles.
struct Timetable {
  std::vector<int> qubits;
  double gate_time_ns = 0.0;
  std::vector<std::vector<std::int8_t>> gates;

  std::size_t cycles() const { return gates.size(); }
  std::size_t slots() const { return qubits.size(); }
  bool drives(std::size_t cycle, std::size_t slot) const { return gates[cycle][slot] >= 0; }
  std::size_t driven_count(std::size_t cycle) const;
};

/// Aligns the sequences cycle by cycle; once a shorter sequence ends, the
/// remaining primitives of the longer ones play on the subset still running.
Timetable schedule_simultaneous(std::span<const CliffordSequence> sequences);

/// One line per sequence: "qubit outcome recovery word gate_time : indices".
void write_sequences(std::ostream& out, std::span<const CliffordSequence> sequences);
std::vector<CliffordSequence> read_sequences(std::istream& in);

}  // namespace spinbench::clifford
