#pragma once

// Eavesdropping strategies acting on one quartet at a time.
//
// Every random decision goes through a Chooser, so a strategy can be sampled
// inside a protocol session or enumerated branch by branch by the oracle.
// Eve commits a key guess for each possible spatial-basis announcement at
// attack time; the announcement only selects between them later.

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dfsqkd/codewords.hpp"
#include "dfsqkd/statevector.hpp"

namespace dfsqkd {

enum class AttackStrategy { None, MeasureResendProduct, MeasureResendEntangled, BellResend, CnotParity };

/// Photons used as CNOT controls: (3,4) by default, (2,4) as the alternative.
enum class CnotPair { Photons34, Photons24 };

struct AttackKind {
  AttackStrategy strategy = AttackStrategy::None;
  /// Measurement basis for measure-resend, direction for CnotParity.
  MeasBasis basis = MeasBasis::X;
  /// Per-quartet interception probability.
  double probability = 1.0;
  CnotPair cnot_pair = CnotPair::Photons34;

  static AttackKind none() { return {}; }
  static AttackKind measure_resend_product(MeasBasis b) { return {AttackStrategy::MeasureResendProduct, b}; }
  static AttackKind measure_resend_entangled(MeasBasis b) { return {AttackStrategy::MeasureResendEntangled, b}; }
  static AttackKind bell_resend() { return {AttackStrategy::BellResend, MeasBasis::X}; }
  static AttackKind cnot_parity(MeasBasis direction) { return {AttackStrategy::CnotParity, direction}; }

  AttackKind with_probability(double p) const {
    AttackKind k = *this;
    k.probability = p;
    return k;
  }

  friend bool operator==(const AttackKind&, const AttackKind&) = default;
};

class UnsupportedAttack : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stable short identifier: none, mrp-x, mrp-z, mre-x, mre-z, bell, cnot-x, cnot-z.
inline std::string attack_id(const AttackKind& k) {
  const std::string suffix = k.basis == MeasBasis::X ? "-x" : "-z";
  switch (k.strategy) {
    case AttackStrategy::None: return "none";
    case AttackStrategy::MeasureResendProduct: return "mrp" + suffix;
    case AttackStrategy::MeasureResendEntangled: return "mre" + suffix;
    case AttackStrategy::BellResend: return "bell";
    case AttackStrategy::CnotParity: return "cnot" + suffix;
  }
  return "?";
}

inline AttackKind parse_attack_id(std::string_view id) {
  if (id == "none") return AttackKind::none();
  if (id == "bell") return AttackKind::bell_resend();
  if (id == "mrp-x") return AttackKind::measure_resend_product(MeasBasis::X);
  if (id == "mrp-z") return AttackKind::measure_resend_product(MeasBasis::Z);
  if (id == "mre-x") return AttackKind::measure_resend_entangled(MeasBasis::X);
  if (id == "mre-z") return AttackKind::measure_resend_entangled(MeasBasis::Z);
  if (id == "cnot-x") return AttackKind::cnot_parity(MeasBasis::X);
  if (id == "cnot-z") return AttackKind::cnot_parity(MeasBasis::Z);
  throw std::invalid_argument("unknown attack id '" + std::string(id) + "'");
}

/// Attack rows analysed for each variant, in table order.
inline std::vector<AttackKind> table_rows(Variant v) {
  using K = AttackKind;
  if (v == Variant::Dephasing)
    return {K::measure_resend_product(MeasBasis::X), K::measure_resend_entangled(MeasBasis::X), K::bell_resend(),
            K::cnot_parity(MeasBasis::X)};
  return {K::measure_resend_product(MeasBasis::X), K::measure_resend_entangled(MeasBasis::X),
          K::measure_resend_product(MeasBasis::Z), K::measure_resend_entangled(MeasBasis::Z),
          K::bell_resend(),                         K::cnot_parity(MeasBasis::Z)};
}

inline bool is_supported(Variant v, const AttackKind& k) {
  if (!(k.probability >= 0.0 && k.probability <= 1.0)) return false;
  switch (k.strategy) {
    case AttackStrategy::None:
    case AttackStrategy::BellResend:
      return true;
    case AttackStrategy::MeasureResendProduct:
    case AttackStrategy::MeasureResendEntangled:
      return v == Variant::Rotation || k.basis == MeasBasis::X;
    case AttackStrategy::CnotParity:
      return k.basis == key_basis(v);
  }
  return false;
}

inline void require_supported(Variant v, const AttackKind& k) {
  if (!(k.probability >= 0.0 && k.probability <= 1.0))
    throw UnsupportedAttack("interception probability must lie in [0, 1]");
  if (!is_supported(v, k))
    throw UnsupportedAttack("attack '" + attack_id(k) + "' is not analysed for the " + std::string(to_string(v)) +
                            " variant");
}

/// Eve's per-quartet notes.
struct EveNote {
  bool intercepted = false;
  std::optional<Outcome> measured;
  std::optional<SpatialBasis> guessed_pairing;
  std::optional<std::array<BellOutcome, 2>> bell_outcomes;
  bool detected_wrong_pairing = false;
  std::optional<int> ancilla_bit;
  /// What was sent on to Bob: "forward", "product:++--", "codeword:Phi1", "bell:psi+,psi+@neighboring".
  std::string resent = "forward";
  /// Committed guess for each possible announcement, indexed by SpatialBasis.
  std::array<KeyBit, 2> guess_by_basis{0, 0};
  /// Best guess without the announcement.
  KeyBit pre_guess = 0;

  KeyBit deferred_guess(SpatialBasis announced) const { return guess_by_basis[static_cast<std::size_t>(announced)]; }
};

struct AttackOutput {
  StateVector state;
  EveNote note;
};

namespace detail {

inline constexpr std::array<double, 2> kFairCoin = {0.5, 0.5};
inline constexpr double kSupportTolerance = 1e-12;

template <Chooser C>
KeyBit flip(C& chooser) {
  return static_cast<KeyBit>(chooser.pick(kFairCoin));
}

template <Chooser C>
KeyBit combine_guesses(const std::array<KeyBit, 2>& g, C& chooser) {
  return g[0] == g[1] ? g[0] : flip(chooser);
}

// Codewords whose support in the measured basis contains the string.
inline std::vector<LogicalState> candidates(Variant v, const Outcome& o) {
  std::vector<LogicalState> out;
  const StateVector probe = product_state(o);
  for (const auto& ls : codewords_of(v))
    if (fidelity(probe, build_codeword(ls)) > kSupportTolerance) out.push_back(ls);
  return out;
}

template <Chooser C>
std::array<KeyBit, 2> guesses_from_candidates(const std::vector<LogicalState>& cands, C& chooser) {
  std::array<KeyBit, 2> g{};
  for (SpatialBasis sb : kSpatialBases) {
    std::optional<KeyBit> bit;
    int count = 0;
    for (const auto& ls : cands)
      if (ls.spatial == sb) {
        bit = ls.key_bit;
        ++count;
      }
    g[static_cast<std::size_t>(sb)] = (count == 1) ? *bit : flip(chooser);
  }
  return g;
}

template <Chooser C>
AttackOutput measure_resend(const AttackKind& k, Variant v, const StateVector& s, C& chooser) {
  auto m = measure_all(s, k.basis, chooser);
  EveNote note;
  note.intercepted = true;
  note.measured = m.outcome;
  const auto cands = candidates(v, m.outcome);
  note.guess_by_basis = guesses_from_candidates(cands, chooser);
  note.pre_guess = combine_guesses(note.guess_by_basis, chooser);

  if (k.strategy == AttackStrategy::MeasureResendProduct) {
    note.resent = "product:" + m.outcome.str();
    return {std::move(m.collapsed), std::move(note)};
  }
  const auto all = codewords_of(v);
  const auto pool = cands.empty() ? std::vector<LogicalState>(all.begin(), all.end()) : cands;
  const std::vector<double> weights(pool.size(), 1.0);
  const LogicalState fake = pool[chooser.pick(weights)];
  note.resent = "codeword:" + name(fake);
  return {build_codeword(fake), std::move(note)};
}

template <Chooser C>
AttackOutput bell_resend(Variant v, const StateVector& s, C& chooser) {
  EveNote note;
  note.intercepted = true;
  const SpatialBasis guess = kSpatialBases[chooser.pick(kFairCoin)];
  note.guessed_pairing = guess;
  const auto pairs = pairing(guess);
  auto first = measure_bell_pair(s, pairs[0].first, pairs[0].second, chooser);
  auto second = measure_bell_pair(first.collapsed, pairs[1].first, pairs[1].second, chooser);
  note.bell_outcomes = std::array<BellOutcome, 2>{first.outcome, second.outcome};

  const auto b1 = bit_for_bell(v, first.outcome);
  const auto b2 = bit_for_bell(v, second.outcome);
  if (b1 && b2) {
    // Consistent with her pairing guess: pass on the measured Bell pairs.
    const KeyBit own = (*b1 == *b2) ? *b1 : flip(chooser);
    note.guess_by_basis[static_cast<std::size_t>(guess)] = own;
    note.guess_by_basis[static_cast<std::size_t>(other(guess))] = flip(chooser);
    note.pre_guess = own;
    note.resent = "bell:" + std::string(to_string(first.outcome)) + "," + std::string(to_string(second.outcome)) +
                  "@" + std::string(to_string(guess));
    return {std::move(second.collapsed), std::move(note)};
  }

  // Outcome outside the codeword alphabet: the pairing guess was wrong.
  note.detected_wrong_pairing = true;
  const SpatialBasis actual = other(guess);
  const StateVector seen = bell_product(guess, first.outcome, second.outcome);
  std::array<double, 2> likelihood{};
  for (KeyBit b : {0, 1}) likelihood[static_cast<std::size_t>(b)] = fidelity(seen, build_codeword({v, actual, b}));
  KeyBit bit = 0;
  if (likelihood[0] > kSupportTolerance && likelihood[1] <= kSupportTolerance) bit = 0;
  else if (likelihood[1] > kSupportTolerance && likelihood[0] <= kSupportTolerance) bit = 1;
  else bit = flip(chooser);
  const LogicalState fake{v, actual, bit};
  note.guess_by_basis = {bit, bit};
  note.pre_guess = bit;
  note.resent = "codeword:" + name(fake);
  return {build_codeword(fake), std::move(note)};
}

template <Chooser C>
AttackOutput cnot_parity(const AttackKind& k, const StateVector& s, C& chooser) {
  EveNote note;
  note.intercepted = true;
  const MeasBasis dir = k.basis;
  const StateVector ancilla = dir == MeasBasis::X ? product_state(Outcome::parse("+")) : basis_state(1, "0");
  StateVector joint = tensor(s, ancilla);
  const int c1 = k.cnot_pair == CnotPair::Photons34 ? 2 : 1;
  const int c2 = 3;
  joint = apply_cnot(joint, c1, 4, dir);
  joint = apply_cnot(joint, c2, 4, dir);
  auto m = measure_and_discard(joint, 4, dir, chooser);
  note.ancilla_bit = m.bit;
  // Ancilla unflipped means the two controls are parallel, which encodes 0.
  const KeyBit parity_guess = m.bit;
  note.guess_by_basis = {parity_guess, parity_guess};
  note.pre_guess = parity_guess;
  note.resent = "forward";
  return {std::move(m.remaining), std::move(note)};
}

}  // namespace detail

/// Applies one strategy to one quartet. The quartet is intercepted with the
/// attack's probability and forwarded untouched otherwise.
template <Chooser C>
AttackOutput attack_quartet(const AttackKind& kind, Variant v, const StateVector& s, C& chooser) {
  require_supported(v, kind);
  if (s.num_qubits() != 4) throw std::invalid_argument("attack_quartet: expected a 4-photon state");
  if (kind.strategy == AttackStrategy::None) return {s, EveNote{}};
  const std::array<double, 2> intercept = {1.0 - kind.probability, kind.probability};
  if (chooser.pick(intercept) == 0) return {s, EveNote{}};

  switch (kind.strategy) {
    case AttackStrategy::MeasureResendProduct:
    case AttackStrategy::MeasureResendEntangled:
      return detail::measure_resend(kind, v, s, chooser);
    case AttackStrategy::BellResend:
      return detail::bell_resend(v, s, chooser);
    case AttackStrategy::CnotParity:
      return detail::cnot_parity(kind, s, chooser);
    case AttackStrategy::None:
      break;
  }
  return {s, EveNote{}};
}

using EveRecord = std::vector<EveNote>;

struct EveReport {
  std::size_t intercepted = 0;
  /// Eve's final guess per position; nullopt where she did not intercept.
  std::vector<std::optional<KeyBit>> guesses;
  std::optional<double> pre_accuracy;
  std::optional<double> post_accuracy;
};

/// Resolves the deferred guesses against the announced bases and scores both
/// guess sets against Alice's key over the intercepted positions.
inline EveReport eve_finalize(const EveRecord& record, std::span<const SpatialBasis> announced,
                              std::span<const KeyBit> alice_key) {
  if (announced.size() != record.size() || alice_key.size() != record.size())
    throw std::invalid_argument("eve_finalize: record, announcement and key lengths differ");
  EveReport rep;
  rep.guesses.resize(record.size());
  std::size_t pre_hits = 0;
  std::size_t post_hits = 0;
  for (std::size_t i = 0; i < record.size(); ++i) {
    const EveNote& note = record[i];
    if (!note.intercepted) continue;
    ++rep.intercepted;
    const KeyBit g = note.deferred_guess(announced[i]);
    rep.guesses[i] = g;
    pre_hits += note.pre_guess == alice_key[i];
    post_hits += g == alice_key[i];
  }
  if (rep.intercepted > 0) {
    rep.pre_accuracy = static_cast<double>(pre_hits) / static_cast<double>(rep.intercepted);
    rep.post_accuracy = static_cast<double>(post_hits) / static_cast<double>(rep.intercepted);
  }
  return rep;
}

}  // namespace dfsqkd
