#include "spinbench/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spinbench::clifford {

namespace {

constexpr std::array<std::string_view, kGroupSize> kWords = {
    "XXXX", "Y",    "X",    "YX",    "XY",    "YY",    "XX",    "YXX",
    "YYX",  "YXY",  "YYY",  "XXX",   "XXY",   "XYY",   "YXYY",  "YYXY",
    "XXXY", "YXXX", "YYXX", "XYYY",  "YYYX",  "YYYXY", "YXXXY", "YXYYY"};

}  // namespace

double axis_phase(Axis axis) { return axis == Axis::X ? 0.0 : 0.5 * std::numbers::pi; }

SU2 primitive_unitary(Axis axis) {
  const double h = std::numbers::sqrt2 / 2.0;
  // b = sin(pi/4) (sin(phi) - i cos(phi)), matching device::step_unitary.
  if (axis == Axis::X) return {device::cplx(h, 0.0), device::cplx(0.0, -h)};
  return {device::cplx(h, 0.0), device::cplx(h, 0.0)};
}

SU2 word_unitary(std::span<const Axis> word) {
  SU2 u = SU2::identity();
  for (Axis a : word) u = primitive_unitary(a) * u;
  return u;
}

std::vector<Axis> parse_word(std::string_view word) {
  std::vector<Axis> out;
  out.reserve(word.size());
  for (char c : word) {
    if (c == 'X' || c == 'x') {
      out.push_back(Axis::X);
    } else if (c == 'Y' || c == 'y') {
      out.push_back(Axis::Y);
    } else {
      throw std::invalid_argument("gate word may only contain X and Y: '" + std::string(word) + "'");
    }
  }
  return out;
}

std::string format_word(std::span<const Axis> word) {
  std::string s;
  for (Axis a : word) s += a == Axis::X ? 'X' : 'Y';
  return s;
}

double trace_fidelity(const SU2& a, const SU2& b) {
  // Tr(A^dagger B) = 2 Re(conj(a.a) b.a + conj(a.b) b.b) for this SU(2) form.
  return std::abs((std::conj(a.a) * b.a + std::conj(a.b) * b.b).real());
}

std::vector<CliffordElement> build_gate_set() {
  std::vector<CliffordElement> set;
  set.reserve(kGroupSize);
  for (std::size_t i = 0; i < kWords.size(); ++i) {
    CliffordElement e;
    e.index = static_cast<int>(i);
    e.word = std::string(kWords[i]);
    e.decomposition = parse_word(e.word);
    e.matrix = word_unitary(e.decomposition);
    set.push_back(std::move(e));
  }
  return set;
}

CliffordGroup::CliffordGroup() : elements_(build_gate_set()) {
  for (std::size_t i = 0; i < kGroupSize; ++i) {
    for (std::size_t j = 0; j < kGroupSize; ++j) {
      compose_[i][j] = find(elements_[j].matrix * elements_[i].matrix);
    }
  }
  for (std::size_t i = 0; i < kGroupSize; ++i) inverse_[i] = find(elements_[i].matrix.adjoint());
}

const CliffordGroup& CliffordGroup::instance() {
  static const CliffordGroup group;
  return group;
}

int CliffordGroup::find(const SU2& u, double tol) const {
  for (const auto& e : elements_) {
    if (trace_fidelity(e.matrix, u) > 1.0 - tol) return e.index;
  }
  throw std::invalid_argument("matrix is not a single-qubit Clifford");
}

std::vector<Axis> CliffordSequence::primitives() const {
  const auto& g = CliffordGroup::instance();
  std::vector<Axis> out;
  out.reserve(primitive_count());
  for (int c : cliffords) {
    const auto& d = g.element(c).decomposition;
    out.insert(out.end(), d.begin(), d.end());
    out.insert(out.end(), interleaved.begin(), interleaved.end());
  }
  const auto& r = g.element(recovery).decomposition;
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::size_t CliffordSequence::primitive_count() const {
  const auto& g = CliffordGroup::instance();
  std::size_t n = g.element(recovery).decomposition.size();
  for (int c : cliffords) n += g.element(c).decomposition.size() + interleaved.size();
  return n;
}

void assign_recovery(CliffordSequence& seq) {
  const auto& g = CliffordGroup::instance();
  int net = kIdentity;
  int inter = kIdentity;
  if (!seq.interleaved.empty()) inter = g.find(word_unitary(seq.interleaved));
  for (int c : seq.cliffords) {
    if (c < 0 || c >= static_cast<int>(kGroupSize)) throw std::out_of_range("Clifford index out of range");
    net = g.compose(net, c);
    if (!seq.interleaved.empty()) net = g.compose(net, inter);
  }
  int rec = g.inverse(net);
  if (seq.outcome == Outcome::Flip) rec = g.compose(rec, kFlip);
  seq.recovery = rec;
}

CliffordSequence random_sequence(std::size_t n, std::mt19937_64& rng, Outcome outcome, int qubit,
                                 double gate_time_ns) {
  if (n < 1) throw std::invalid_argument("random_sequence: n must be >= 1");
  CliffordSequence seq;
  seq.qubit = qubit;
  seq.gate_time_ns = gate_time_ns;
  seq.outcome = outcome;
  seq.cliffords.resize(n);
  // Reduction of a 64-bit draw; the modulo bias is below 1e-18.
  for (auto& c : seq.cliffords) c = static_cast<int>(rng() % kGroupSize);
  assign_recovery(seq);
  return seq;
}

CliffordSequence interleave(CliffordSequence seq, std::span<const Axis> word) {
  CliffordGroup::instance().find(word_unitary(word));
  seq.interleaved.assign(word.begin(), word.end());
  assign_recovery(seq);
  return seq;
}

std::size_t Timetable::driven_count(std::size_t cycle) const {
  return static_cast<std::size_t>(
      std::count_if(gates[cycle].begin(), gates[cycle].end(), [](std::int8_t g) { return g >= 0; }));
}

Timetable schedule_simultaneous(std::span<const CliffordSequence> sequences) {
  if (sequences.empty()) throw std::invalid_argument("schedule_simultaneous: no sequences");
  Timetable t;
  t.gate_time_ns = sequences.front().gate_time_ns;
  std::vector<std::vector<Axis>> prims;
  std::size_t longest = 0;
  for (const auto& s : sequences) {
    if (std::abs(s.gate_time_ns - t.gate_time_ns) > 1e-9) {
      throw std::invalid_argument("schedule_simultaneous: mixed gate times");
    }
    t.qubits.push_back(s.qubit);
    prims.push_back(s.primitives());
    longest = std::max(longest, prims.back().size());
  }
  t.gates.assign(longest, std::vector<std::int8_t>(sequences.size(), -1));
  for (std::size_t q = 0; q < prims.size(); ++q) {
    for (std::size_t c = 0; c < prims[q].size(); ++c) t.gates[c][q] = static_cast<std::int8_t>(prims[q][c]);
  }
  return t;
}

void write_sequences(std::ostream& out, std::span<const CliffordSequence> sequences) {
  for (const auto& s : sequences) {
    out << s.qubit << ' ' << (s.outcome == Outcome::Flip ? "flip" : "identity") << ' ' << s.recovery
        << ' ' << (s.interleaved.empty() ? "-" : format_word(s.interleaved)) << ' ' << s.gate_time_ns << " :";
    for (int c : s.cliffords) out << ' ' << c;
    out << '\n';
  }
}

std::vector<CliffordSequence> read_sequences(std::istream& in) {
  std::vector<CliffordSequence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    CliffordSequence s;
    std::string outcome, word, colon;
    if (!(ls >> s.qubit >> outcome >> s.recovery >> word >> s.gate_time_ns >> colon) || colon != ":") {
      throw std::invalid_argument("sequence line " + std::to_string(line_no) + ": malformed header");
    }
    if (outcome != "flip" && outcome != "identity") {
      throw std::invalid_argument("sequence line " + std::to_string(line_no) + ": bad outcome");
    }
    s.outcome = outcome == "flip" ? Outcome::Flip : Outcome::Identity;
    if (word != "-") s.interleaved = parse_word(word);
    int c = 0;
    while (ls >> c) s.cliffords.push_back(c);
    const int stored = s.recovery;
    assign_recovery(s);
    if (stored != s.recovery) {
      throw std::invalid_argument("sequence line " + std::to_string(line_no) + ": recovery mismatch");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace spinbench::clifford
