#pragma once

// Dense statevector engine for at most five qubits.
//
// Qubit 0 is the most significant bit of an amplitude index, so a printed
// bitstring reads left to right as photons 1, 2, 3, ... of a quartet.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfsqkd/random.hpp"

namespace dfsqkd {

using Amplitude = std::complex<double>;
using Matrix2 = std::array<std::array<Amplitude, 2>, 2>;

inline constexpr int kMaxQubits = 5;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kSqrtHalf = 0.70710678118654752440;

enum class MeasBasis { Z, X };

enum class BellOutcome { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus};

inline std::string_view to_string(MeasBasis b) { return b == MeasBasis::Z ? "Z" : "X"; }

inline std::string_view to_string(BellOutcome b) {
  switch (b) {
    case BellOutcome::PhiPlus: return "phi+";
    case BellOutcome::PhiMinus: return "phi-";
    case BellOutcome::PsiPlus: return "psi+";
    case BellOutcome::PsiMinus: return "psi-";
  }
  return "?";
}

/// Result string of a product measurement. Bit value 1 means |1> in the Z
/// basis and |-> in the X basis; the string form uses 0/1 or +/- accordingly.
struct Outcome {
  MeasBasis basis = MeasBasis::Z;
  int num_qubits = 0;
  std::uint32_t bits = 0;

  int bit(int q) const { return static_cast<int>((bits >> (num_qubits - 1 - q)) & 1U); }

  std::string str() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(num_qubits));
    for (int q = 0; q < num_qubits; ++q) {
      const int b = bit(q);
      out.push_back(basis == MeasBasis::Z ? static_cast<char>('0' + b) : (b ? '-' : '+'));
    }
    return out;
  }

  /// Parses "0110" (Z) or "+-+-" (X). Mixed alphabets are rejected.
  static Outcome parse(std::string_view text) {
    if (text.empty() || text.size() > static_cast<std::size_t>(kMaxQubits))
      throw std::invalid_argument("Outcome::parse: bad length");
    Outcome o;
    o.num_qubits = static_cast<int>(text.size());
    const bool x = text[0] == '+' || text[0] == '-';
    o.basis = x ? MeasBasis::X : MeasBasis::Z;
    for (char c : text) {
      int b = 0;
      if (x && (c == '+' || c == '-')) b = c == '-';
      else if (!x && (c == '0' || c == '1')) b = c == '1';
      else throw std::invalid_argument("Outcome::parse: bad symbol in '" + std::string(text) + "'");
      o.bits = (o.bits << 1) | static_cast<std::uint32_t>(b);
    }
    return o;
  }

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

class StateVector {
 public:
  /// Strict constructor: length must be 2^num_qubits, entries finite and the
  /// squared norm within 1e-9 of one. The stored vector is renormalized.
  static StateVector from_amplitudes(int num_qubits, std::vector<Amplitude> amps) {
    check_qubit_count(num_qubits);
    if (amps.size() != (std::size_t{1} << num_qubits))
      throw std::invalid_argument("StateVector: amplitude count does not match qubit count");
    double norm2 = 0.0;
    for (const auto& a : amps) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("StateVector: non-finite amplitude");
      norm2 += std::norm(a);
    }
    if (std::abs(norm2 - 1.0) > 1e-9) throw std::invalid_argument("StateVector: state is not normalized");
    return StateVector(num_qubits, std::move(amps), norm2);
  }

  /// Scales any nonzero finite vector to unit norm.
  static StateVector normalized(int num_qubits, std::vector<Amplitude> amps) {
    check_qubit_count(num_qubits);
    if (amps.size() != (std::size_t{1} << num_qubits))
      throw std::invalid_argument("StateVector: amplitude count does not match qubit count");
    double norm2 = 0.0;
    for (const auto& a : amps) norm2 += std::norm(a);
    if (!(norm2 > 1e-300) || !std::isfinite(norm2))
      throw std::invalid_argument("StateVector: cannot normalize zero or non-finite vector");
    return StateVector(num_qubits, std::move(amps), norm2);
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  Amplitude operator[](std::size_t index) const { return amps_.at(index); }

  double norm2() const {
    double n = 0.0;
    for (const auto& a : amps_) n += std::norm(a);
    return n;
  }

  int bit_of(std::size_t index, int q) const {
    return static_cast<int>((index >> (num_qubits_ - 1 - q)) & 1U);
  }

  static void check_qubit_count(int n) {
    if (n < 1 || n > kMaxQubits)
      throw std::invalid_argument("StateVector: qubit count must be in 1..5, got " + std::to_string(n));
  }

 private:
  StateVector(int n, std::vector<Amplitude> amps, double norm2) : num_qubits_(n), amps_(std::move(amps)) {
    const double scale = 1.0 / std::sqrt(norm2);
    if (std::abs(norm2 - 1.0) > 0.0)
      for (auto& a : amps_) a *= scale;
  }

  int num_qubits_;
  std::vector<Amplitude> amps_;
};

namespace detail {

inline void check_qubit(const StateVector& s, int q) {
  if (q < 0 || q >= s.num_qubits())
    throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(s.num_qubits()) + "-qubit state");
}

inline std::size_t mask_of(const StateVector& s, int q) {
  return std::size_t{1} << (s.num_qubits() - 1 - q);
}

inline Matrix2 hadamard() {
  return {{{Amplitude(kSqrtHalf), Amplitude(kSqrtHalf)}, {Amplitude(kSqrtHalf), Amplitude(-kSqrtHalf)}}};
}

// Unchecked in-place 2x2 application on one wire.
inline void apply_matrix(std::vector<Amplitude>& amps, int n, int q, const Matrix2& u) {
  const std::size_t mask = std::size_t{1} << (n - 1 - q);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const Amplitude a0 = amps[i];
    const Amplitude a1 = amps[i | mask];
    amps[i] = u[0][0] * a0 + u[0][1] * a1;
    amps[i | mask] = u[1][0] * a0 + u[1][1] * a1;
  }
}

inline std::vector<Amplitude> copy_amps(const StateVector& s) {
  return {s.amplitudes().begin(), s.amplitudes().end()};
}

// Amplitudes expressed in the product basis: for X, Hadamard on every wire.
inline std::vector<Amplitude> in_basis(const StateVector& s, MeasBasis basis) {
  auto amps = copy_amps(s);
  if (basis == MeasBasis::X) {
    const Matrix2 h = hadamard();
    for (int q = 0; q < s.num_qubits(); ++q) apply_matrix(amps, s.num_qubits(), q, h);
  }
  return amps;
}

}  // namespace detail

inline StateVector basis_state(int num_qubits, std::string_view bits) {
  StateVector::check_qubit_count(num_qubits);
  if (bits.size() != static_cast<std::size_t>(num_qubits))
    throw std::invalid_argument("basis_state: bitstring length must equal qubit count");
  std::size_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("basis_state: bits must be 0 or 1");
    index = (index << 1) | static_cast<std::size_t>(c == '1');
  }
  std::vector<Amplitude> amps(std::size_t{1} << num_qubits);
  amps[index] = 1.0;
  return StateVector::from_amplitudes(num_qubits, std::move(amps));
}

/// Product eigenstate of a measurement outcome, e.g. "++--" or "0110".
inline StateVector product_state(const Outcome& o) {
  std::vector<Amplitude> amps(std::size_t{1} << o.num_qubits);
  amps[o.bits] = 1.0;
  if (o.basis == MeasBasis::X) {
    const Matrix2 h = detail::hadamard();
    for (int q = 0; q < o.num_qubits; ++q) detail::apply_matrix(amps, o.num_qubits, q, h);
  }
  return StateVector::normalized(o.num_qubits, std::move(amps));
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  const int n = a.num_qubits() + b.num_qubits();
  if (n > kMaxQubits) throw std::invalid_argument("tensor: combined qubit count exceeds 5");
  std::vector<Amplitude> amps(std::size_t{1} << n);
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) amps[i * b.dim() + j] = a[i] * b[j];
  return StateVector::normalized(n, std::move(amps));
}

inline bool is_unitary(const Matrix2& u, double tol = kUnitaryTolerance) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      Amplitude dot = std::conj(u[0][r]) * u[0][c] + std::conj(u[1][r]) * u[1][c];
      if (std::abs(dot - Amplitude(r == c ? 1.0 : 0.0)) > tol) return false;
    }
  return true;
}

inline StateVector apply_single_qubit(const StateVector& s, int q, const Matrix2& u) {
  detail::check_qubit(s, q);
  if (!is_unitary(u)) throw std::invalid_argument("apply_single_qubit: matrix is not unitary");
  auto amps = detail::copy_amps(s);
  detail::apply_matrix(amps, s.num_qubits(), q, u);
  return StateVector::normalized(s.num_qubits(), std::move(amps));
}

/// Controlled flip. In the Z basis this is the ordinary CNOT. In the X basis
/// the control fires on |-> and the target is flipped between |+> and |->,
/// i.e. the ordinary CNOT conjugated by Hadamards on both wires.
inline StateVector apply_cnot(const StateVector& s, int control, int target, MeasBasis basis = MeasBasis::Z) {
  detail::check_qubit(s, control);
  detail::check_qubit(s, target);
  if (control == target) throw std::invalid_argument("apply_cnot: control and target must differ");
  auto amps = detail::copy_amps(s);
  const int n = s.num_qubits();
  const Matrix2 h = detail::hadamard();
  if (basis == MeasBasis::X) {
    detail::apply_matrix(amps, n, control, h);
    detail::apply_matrix(amps, n, target, h);
  }
  const std::size_t cm = detail::mask_of(s, control);
  const std::size_t tm = detail::mask_of(s, target);
  for (std::size_t i = 0; i < amps.size(); ++i)
    if ((i & cm) && !(i & tm)) std::swap(amps[i], amps[i | tm]);
  if (basis == MeasBasis::X) {
    detail::apply_matrix(amps, n, control, h);
    detail::apply_matrix(amps, n, target, h);
  }
  return StateVector::normalized(n, std::move(amps));
}

inline Amplitude inner_product(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("inner_product: dimension mismatch");
  Amplitude acc{};
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline double fidelity(const StateVector& a, const StateVector& b) { return std::norm(inner_product(a, b)); }

/// Born probabilities of every product outcome, indexed by outcome bits.
inline std::vector<double> outcome_probabilities(const StateVector& s, MeasBasis basis) {
  const auto amps = detail::in_basis(s, basis);
  std::vector<double> probs(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) probs[i] = std::norm(amps[i]);
  return probs;
}

struct ProductMeasurement {
  Outcome outcome;
  StateVector collapsed;
};

template <Chooser C>
ProductMeasurement measure_all(const StateVector& s, MeasBasis basis, C& chooser) {
  const auto probs = outcome_probabilities(s, basis);
  const std::size_t index = chooser.pick(probs);
  Outcome o{basis, s.num_qubits(), static_cast<std::uint32_t>(index)};
  return {o, product_state(o)};
}

struct QubitMeasurement {
  int bit = 0;
  StateVector remaining;
};

/// Measures one qubit in the given basis and removes it from the register.
template <Chooser C>
QubitMeasurement measure_and_discard(const StateVector& s, int q, MeasBasis basis, C& chooser) {
  detail::check_qubit(s, q);
  if (s.num_qubits() < 2) throw std::invalid_argument("measure_and_discard: nothing would remain");
  auto amps = detail::copy_amps(s);
  const int n = s.num_qubits();
  if (basis == MeasBasis::X) detail::apply_matrix(amps, n, q, detail::hadamard());
  const std::size_t mask = detail::mask_of(s, q);
  std::array<double, 2> probs{};
  for (std::size_t i = 0; i < amps.size(); ++i) probs[(i & mask) ? 1 : 0] += std::norm(amps[i]);
  const int bit = static_cast<int>(chooser.pick(probs));

  std::vector<Amplitude> rest(std::size_t{1} << (n - 1));
  const int low_bits = n - 1 - q;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (static_cast<int>((i & mask) != 0) != bit) continue;
    const std::size_t low = i & ((std::size_t{1} << low_bits) - 1);
    const std::size_t high = i >> (low_bits + 1);
    rest[(high << low_bits) | low] = amps[i];
  }
  return {bit, StateVector::normalized(n - 1, std::move(rest))};
}

/// Two-qubit Bell state with the first listed qubit as the high bit.
inline StateVector bell_state(BellOutcome b) {
  std::vector<Amplitude> amps(4);
  switch (b) {
    case BellOutcome::PhiPlus: amps = {kSqrtHalf, 0, 0, kSqrtHalf}; break;
    case BellOutcome::PhiMinus: amps = {kSqrtHalf, 0, 0, -kSqrtHalf}; break;
    case BellOutcome::PsiPlus: amps = {0, kSqrtHalf, kSqrtHalf, 0}; break;
    case BellOutcome::PsiMinus: amps = {0, kSqrtHalf, -kSqrtHalf, 0}; break;
  }
  return StateVector::normalized(2, std::move(amps));
}

namespace detail {

// Unnormalized (|beta><beta| on (q1,q2)) applied to s.
inline std::vector<Amplitude> bell_project(const StateVector& s, int q1, int q2, BellOutcome b) {
  const StateVector beta = bell_state(b);
  const std::size_t m1 = mask_of(s, q1);
  const std::size_t m2 = mask_of(s, q2);
  std::vector<Amplitude> out(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    if (i & (m1 | m2)) continue;
    const std::array<std::size_t, 4> idx = {i, i | m2, i | m1, i | m1 | m2};
    Amplitude overlap{};
    for (int k = 0; k < 4; ++k) overlap += std::conj(beta[static_cast<std::size_t>(k)]) * s[idx[k]];
    for (int k = 0; k < 4; ++k) out[idx[k]] = beta[static_cast<std::size_t>(k)] * overlap;
  }
  return out;
}

inline void check_pair(const StateVector& s, int q1, int q2) {
  check_qubit(s, q1);
  check_qubit(s, q2);
  if (q1 == q2) throw std::invalid_argument("Bell measurement needs two distinct qubits");
}

}  // namespace detail

inline std::array<double, 4> bell_probabilities(const StateVector& s, int q1, int q2) {
  detail::check_pair(s, q1, q2);
  std::array<double, 4> probs{};
  for (std::size_t k = 0; k < 4; ++k) {
    for (const auto& a : detail::bell_project(s, q1, q2, kBellOutcomes[k])) probs[k] += std::norm(a);
  }
  return probs;
}

struct BellMeasurement {
  BellOutcome outcome;
  StateVector collapsed;
};

template <Chooser C>
BellMeasurement measure_bell_pair(const StateVector& s, int q1, int q2, C& chooser) {
  const auto probs = bell_probabilities(s, q1, q2);
  const std::size_t k = chooser.pick(probs);
  return {kBellOutcomes[k], StateVector::normalized(s.num_qubits(), detail::bell_project(s, q1, q2, kBellOutcomes[k]))};
}

}  // namespace dfsqkd
