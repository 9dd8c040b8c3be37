#pragma once

// The eight four-photon logical states, their expansion into the component
// terms a..h, key decoding and per-pair check predicates.
//
// Each codeword is a product of two identical Bell pairs. The pairing is the
// spatial basis: Neighboring pairs photons (1,2),(3,4); Crossing pairs
// (1,3),(2,4). Dephasing codewords use psi+ (bit 0) and psi- (bit 1) and are
// read out in X; rotation codewords use phi+ (bit 0) and psi- (bit 1) and are
// read out in Z.

#include <array>
#include <bit>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "dfsqkd/statevector.hpp"

namespace dfsqkd {

enum class Variant { Dephasing, Rotation };
enum class SpatialBasis { Neighboring, Crossing };

using KeyBit = int;

inline std::string_view to_string(Variant v) { return v == Variant::Dephasing ? "dephasing" : "rotation"; }
inline std::string_view to_string(SpatialBasis b) { return b == SpatialBasis::Neighboring ? "neighboring" : "crossing"; }

inline constexpr std::array<SpatialBasis, 2> kSpatialBases = {SpatialBasis::Neighboring, SpatialBasis::Crossing};

inline SpatialBasis other(SpatialBasis b) {
  return b == SpatialBasis::Neighboring ? SpatialBasis::Crossing : SpatialBasis::Neighboring;
}

inline MeasBasis key_basis(Variant v) { return v == Variant::Dephasing ? MeasBasis::X : MeasBasis::Z; }

using QubitPair = std::pair<int, int>;

inline std::array<QubitPair, 2> pairing(SpatialBasis b) {
  if (b == SpatialBasis::Neighboring) return {QubitPair{0, 1}, QubitPair{2, 3}};
  return {QubitPair{0, 2}, QubitPair{1, 3}};
}

struct LogicalState {
  Variant variant = Variant::Dephasing;
  SpatialBasis spatial = SpatialBasis::Neighboring;
  KeyBit key_bit = 0;

  friend bool operator==(const LogicalState&, const LogicalState&) = default;
};

/// "Psi0", "Phi1", ... (Psi = neighboring, Phi = crossing).
inline std::string name(const LogicalState& ls) {
  return std::string(ls.spatial == SpatialBasis::Neighboring ? "Psi" : "Phi") + std::to_string(ls.key_bit);
}

/// The four codewords of a variant in the order Psi0, Psi1, Phi0, Phi1.
inline std::array<LogicalState, 4> codewords_of(Variant v) {
  return {LogicalState{v, SpatialBasis::Neighboring, 0}, LogicalState{v, SpatialBasis::Neighboring, 1},
          LogicalState{v, SpatialBasis::Crossing, 0}, LogicalState{v, SpatialBasis::Crossing, 1}};
}

/// Bell pair carrying a key bit in the given variant.
inline BellOutcome bell_for_bit(Variant v, KeyBit bit) {
  if (bit == 1) return BellOutcome::PsiMinus;
  return v == Variant::Dephasing ? BellOutcome::PsiPlus : BellOutcome::PhiPlus;
}

/// Inverse of bell_for_bit; nullopt for Bell states outside the variant's
/// alphabet (phi+- for dephasing, phi- and psi+ for rotation).
inline std::optional<KeyBit> bit_for_bell(Variant v, BellOutcome b) {
  if (b == BellOutcome::PsiMinus) return 1;
  if (b == bell_for_bit(v, 0)) return 0;
  return std::nullopt;
}

/// Product of two Bell states placed on the two pairs of a pairing.
inline StateVector bell_product(SpatialBasis spatial, BellOutcome first, BellOutcome second) {
  const auto pairs = pairing(spatial);
  const StateVector b1 = bell_state(first);
  const StateVector b2 = bell_state(second);
  std::vector<Amplitude> amps(16);
  for (std::size_t i = 0; i < 16; ++i) {
    auto bit = [i](int q) { return (i >> (3 - q)) & 1U; };
    const std::size_t i1 = (bit(pairs[0].first) << 1) | bit(pairs[0].second);
    const std::size_t i2 = (bit(pairs[1].first) << 1) | bit(pairs[1].second);
    amps[i] = b1[i1] * b2[i2];
  }
  return StateVector::normalized(4, std::move(amps));
}

inline StateVector build_codeword(const LogicalState& ls) {
  if (ls.key_bit != 0 && ls.key_bit != 1) throw std::invalid_argument("build_codeword: key bit must be 0 or 1");
  const BellOutcome b = bell_for_bit(ls.variant, ls.key_bit);
  return bell_product(ls.spatial, b, b);
}

/// Two-qubit building blocks: |01>,|10> for dephasing; phi+, psi- for rotation.
inline std::pair<StateVector, StateVector> logical_basis_states(Variant v) {
  if (v == Variant::Dephasing) return {basis_state(2, "01"), basis_state(2, "10")};
  return {bell_state(BellOutcome::PhiPlus), bell_state(BellOutcome::PsiMinus)};
}

// ---------------------------------------------------------------------------
// Component terms

enum class ComponentTerm { a, b, c, d, e, f, g, h };

using Ket4 = std::array<Amplitude, 16>;

namespace detail {

inline Ket4 half_sum(std::string_view first, std::string_view second) {
  Ket4 out{};
  for (auto text : {first, second}) {
    const Outcome o = Outcome::parse(text);
    if (o.basis == MeasBasis::Z) {
      out[o.bits] += 0.5;
      continue;
    }
    // <x|s> for an X string s is (1/4) * (-1)^{popcount(x & s)}; exact in binary.
    for (std::uint32_t x = 0; x < 16; ++x) {
      const int sign = (std::popcount(x & o.bits) & 1) ? -1 : 1;
      out[x] += 0.5 * 0.25 * sign;
    }
  }
  return out;
}

}  // namespace detail

/// Component term in the computational basis. Squared norm is 1/2.
inline Ket4 component(ComponentTerm t) {
  switch (t) {
    case ComponentTerm::a: return detail::half_sum("++++", "----");
    case ComponentTerm::b: return detail::half_sum("++--", "--++");
    case ComponentTerm::c: return detail::half_sum("+-+-", "-+-+");
    case ComponentTerm::d: return detail::half_sum("+--+", "-++-");
    case ComponentTerm::e: return detail::half_sum("0000", "1111");
    case ComponentTerm::f: return detail::half_sum("0011", "1100");
    case ComponentTerm::g: return detail::half_sum("0101", "1010");
    case ComponentTerm::h: return detail::half_sum("0110", "1001");
  }
  return {};
}

/// (first, sign, second) with codeword = first + sign * second.
struct Decomposition {
  ComponentTerm first;
  int sign;
  ComponentTerm second;
};

inline Decomposition decomposition(const LogicalState& ls) {
  using T = ComponentTerm;
  const bool nb = ls.spatial == SpatialBasis::Neighboring;
  if (ls.variant == Variant::Dephasing) {
    // psi+ = (|++> - |-->)/sqrt2, so the bit-0 products carry a minus sign;
    // a + b would be phi+ (x) phi+ instead.
    if (nb) return ls.key_bit == 0 ? Decomposition{T::a, -1, T::b} : Decomposition{T::c, -1, T::d};
    return ls.key_bit == 0 ? Decomposition{T::a, -1, T::c} : Decomposition{T::b, -1, T::d};
  }
  if (nb) return ls.key_bit == 0 ? Decomposition{T::e, 1, T::f} : Decomposition{T::g, -1, T::h};
  return ls.key_bit == 0 ? Decomposition{T::e, 1, T::g} : Decomposition{T::f, -1, T::h};
}

// ---------------------------------------------------------------------------
// Decoding and checks

inline bool pair_parallel(const Outcome& o, QubitPair p) { return o.bit(p.first) == o.bit(p.second); }

/// Key decoding from a key-basis outcome: parallel pairs mean 0, antiparallel
/// pairs mean 1. nullopt when the two pairs disagree.
inline std::optional<KeyBit> decode_key(Variant v, SpatialBasis spatial, const Outcome& outcome) {
  if (outcome.num_qubits != 4) throw std::invalid_argument("decode_key: expected a 4-photon outcome");
  if (outcome.basis != key_basis(v)) throw std::invalid_argument("decode_key: outcome is not in the variant's key basis");
  const auto pairs = pairing(spatial);
  const bool p1 = pair_parallel(outcome, pairs[0]);
  const bool p2 = pair_parallel(outcome, pairs[1]);
  if (p1 != p2) return std::nullopt;
  return p1 ? 0 : 1;
}

/// Whether each pair of a codeword is parallel when measured in `meas`.
inline bool expects_parallel(const LogicalState& ls, MeasBasis meas) {
  if (ls.variant == Variant::Dephasing && meas == MeasBasis::Z) return false;
  return ls.key_bit == 0;
}

struct PairChecks {
  bool pair1_ok = true;
  bool pair2_ok = true;

  int failures() const { return static_cast<int>(!pair1_ok) + static_cast<int>(!pair2_ok); }
  friend bool operator==(const PairChecks&, const PairChecks&) = default;
};

inline PairChecks check_consistency(const LogicalState& ls, MeasBasis meas, const Outcome& outcome) {
  if (outcome.num_qubits != 4 || outcome.basis != meas)
    throw std::invalid_argument("check_consistency: outcome does not match the check basis");
  const auto pairs = pairing(ls.spatial);
  const bool want = expects_parallel(ls, meas);
  return {pair_parallel(outcome, pairs[0]) == want, pair_parallel(outcome, pairs[1]) == want};
}

using OverlapTable = std::array<std::array<double, 4>, 4>;

/// |<i|j>| over the variant's codewords in the order Psi0, Psi1, Phi0, Phi1.
inline OverlapTable overlap_table(Variant v) {
  const auto cws = codewords_of(v);
  std::array<StateVector, 4> states = {build_codeword(cws[0]), build_codeword(cws[1]), build_codeword(cws[2]),
                                       build_codeword(cws[3])};
  OverlapTable t{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) t[i][j] = std::abs(inner_product(states[i], states[j]));
  return t;
}

}  // namespace dfsqkd
