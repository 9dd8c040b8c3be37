#pragma once

// Alice/Bob session: preparation, collective-noise channel with an optional
// eavesdropper, Bob's passive product measurements, the two-basis check,
// abort decision and sifting.
//
// Classical messages are appended to a Transcript, which rejects any order
// other than check positions -> check-state reveal -> basis announcement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfsqkd/adversary.hpp"
#include "dfsqkd/codewords.hpp"
#include "dfsqkd/noise.hpp"
#include "dfsqkd/random.hpp"
#include "dfsqkd/statevector.hpp"

namespace dfsqkd {

inline constexpr double kDefaultAbortThreshold = 0.01;

struct SessionConfig {
  std::size_t n = 64;
  std::size_t delta = 16;
  Variant variant = Variant::Dephasing;
  NoisePolicy noise_policy = FixedNoise{0.0};
  /// Fraction of each quartet's noise applied before Eve; the rest after.
  double noise_split = 1.0;
  double abort_threshold = kDefaultAbortThreshold;
  std::uint64_t seed = 0;

  std::size_t total() const { return n + 2 * delta; }
};

inline void validate(const SessionConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("session: n must be at least 1");
  if (cfg.delta < 1) throw std::invalid_argument("session: delta must be at least 1");
  if (!(cfg.abort_threshold >= 0.0 && cfg.abort_threshold <= 1.0))
    throw std::invalid_argument("session: abort threshold must lie in [0, 1]");
  if (!(cfg.noise_split >= 0.0 && cfg.noise_split <= 1.0))
    throw std::invalid_argument("session: noise split must lie in [0, 1]");
  validate(cfg.noise_policy);
}

// Independent random streams of one session.
enum class Stream : std::uint64_t { Alice = 1, Channel = 2, Eve = 3, Bob = 4 };

inline Rng stream_rng(std::uint64_t seed, Stream s) { return Rng::stream(seed, static_cast<std::uint64_t>(s)); }

// ---------------------------------------------------------------------------
// Classical channel

enum class MessageKind { CheckPositions, CheckStateReveal, Abort, BasisAnnouncement, PostProcessing };

inline std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::CheckPositions: return "check_positions";
    case MessageKind::CheckStateReveal: return "check_state_reveal";
    case MessageKind::Abort: return "abort";
    case MessageKind::BasisAnnouncement: return "basis_announcement";
    case MessageKind::PostProcessing: return "post_processing";
  }
  return "?";
}

struct Message {
  MessageKind kind;
  std::string sender;
  std::string summary;
};

class ProtocolOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Authenticated, error-free classical channel log.
class Transcript {
 public:
  void post(MessageKind kind, std::string sender, std::string summary) {
    if (!allowed(kind))
      throw ProtocolOrderError("message '" + std::string(to_string(kind)) + "' is not allowed after '" +
                               (messages_.empty() ? std::string("start") : std::string(to_string(messages_.back().kind))) +
                               "'");
    messages_.push_back({kind, std::move(sender), std::move(summary)});
  }

  const std::vector<Message>& messages() const { return messages_; }

  bool contains(MessageKind kind) const {
    return std::any_of(messages_.begin(), messages_.end(), [kind](const Message& m) { return m.kind == kind; });
  }

 private:
  bool allowed(MessageKind kind) const {
    const std::optional<MessageKind> last =
        messages_.empty() ? std::nullopt : std::optional<MessageKind>(messages_.back().kind);
    switch (kind) {
      case MessageKind::CheckPositions: return !last;
      case MessageKind::CheckStateReveal: return last == MessageKind::CheckPositions;
      case MessageKind::Abort:
      case MessageKind::BasisAnnouncement: return last == MessageKind::CheckStateReveal;
      case MessageKind::PostProcessing: return last == MessageKind::BasisAnnouncement;
    }
    return false;
  }

  std::vector<Message> messages_;
};

// ---------------------------------------------------------------------------
// Alice

struct AliceRecord {
  std::vector<KeyBit> key_bits;
  std::vector<SpatialBasis> basis_bits;

  LogicalState state_at(std::size_t i, Variant v) const { return {v, basis_bits.at(i), key_bits.at(i)}; }
};

struct Preparation {
  AliceRecord record;
  std::vector<StateVector> quartets;
};

template <RandomSource R>
Preparation alice_prepare(const SessionConfig& cfg, R& rand) {
  validate(cfg);
  Preparation p;
  const std::size_t total = cfg.total();
  p.record.key_bits.reserve(total);
  p.record.basis_bits.reserve(total);
  p.quartets.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const KeyBit k = static_cast<KeyBit>(rand.pick(detail::kFairCoin));
    const SpatialBasis b = kSpatialBases[rand.pick(detail::kFairCoin)];
    p.record.key_bits.push_back(k);
    p.record.basis_bits.push_back(b);
    p.quartets.push_back(build_codeword({cfg.variant, b, k}));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Channel

inline StateVector apply_channel_noise(Variant v, const StateVector& s, double param) {
  if (param == 0.0) return s;
  const auto photons = all_photons(s);
  if (v == Variant::Dephasing) return collective_dephasing(s, photons, DephasingParam{param});
  return collective_rotation(s, photons, RotationParam{param});
}

struct ChannelOutput {
  std::vector<StateVector> quartets;
  EveRecord eve;
  std::vector<double> noise;
};

template <RandomSource R, Chooser C>
ChannelOutput transmit(const SessionConfig& cfg, const AttackKind& attack, std::vector<StateVector> quartets,
                       R& channel_rand, C& eve_rand) {
  ChannelOutput out;
  out.eve.reserve(quartets.size());
  out.noise.reserve(quartets.size());
  for (auto& q : quartets) {
    const double param = sample_noise(cfg.noise_policy, channel_rand);
    const double before = cfg.noise_split * param;
    StateVector s = apply_channel_noise(cfg.variant, q, before);
    auto attacked = attack_quartet(attack, cfg.variant, s, eve_rand);
    q = apply_channel_noise(cfg.variant, attacked.state, param - before);
    out.eve.push_back(std::move(attacked.note));
    out.noise.push_back(param);
  }
  out.quartets = std::move(quartets);
  return out;
}

// ---------------------------------------------------------------------------
// Bob

enum class PositionRole { Key, CheckZ, CheckX };

struct BobRecord {
  std::vector<std::size_t> check_positions_z;
  std::vector<std::size_t> check_positions_x;
  std::vector<PositionRole> roles;
  std::vector<Outcome> outcomes;
};

template <RandomSource R>
BobRecord bob_measure(const SessionConfig& cfg, const std::vector<StateVector>& quartets, R& rand) {
  validate(cfg);
  const std::size_t total = cfg.total();
  if (quartets.size() != total)
    throw std::invalid_argument("bob_measure: expected " + std::to_string(total) + " quartets, got " +
                                std::to_string(quartets.size()));
  // Partial Fisher-Yates: the first 2*delta slots are the check samples.
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  for (std::size_t i = 0; i < 2 * cfg.delta; ++i) std::swap(order[i], order[i + rand.below(total - i)]);

  BobRecord bob;
  bob.roles.assign(total, PositionRole::Key);
  bob.check_positions_z.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.delta));
  bob.check_positions_x.assign(order.begin() + static_cast<std::ptrdiff_t>(cfg.delta),
                               order.begin() + static_cast<std::ptrdiff_t>(2 * cfg.delta));
  std::sort(bob.check_positions_z.begin(), bob.check_positions_z.end());
  std::sort(bob.check_positions_x.begin(), bob.check_positions_x.end());
  for (auto i : bob.check_positions_z) bob.roles[i] = PositionRole::CheckZ;
  for (auto i : bob.check_positions_x) bob.roles[i] = PositionRole::CheckX;

  bob.outcomes.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    MeasBasis basis = key_basis(cfg.variant);
    if (bob.roles[i] == PositionRole::CheckZ) basis = MeasBasis::Z;
    if (bob.roles[i] == PositionRole::CheckX) basis = MeasBasis::X;
    bob.outcomes.push_back(measure_all(quartets[i], basis, rand).outcome);
  }
  return bob;
}

// ---------------------------------------------------------------------------
// Check and sifting

/// Per-basis check tally. quartets_failing[k] counts check quartets with k
/// failed pairs.
struct CheckTally {
  std::size_t failed_pairs = 0;
  std::size_t pairs = 0;
  std::array<std::size_t, 3> quartets_failing{};

  double rate() const { return pairs == 0 ? 0.0 : static_cast<double>(failed_pairs) / static_cast<double>(pairs); }
};

struct CheckResult {
  CheckTally x;
  CheckTally z;
  double eX = 0.0;
  double eZ = 0.0;
  double eA = 0.0;
  bool abort = false;
};

inline std::string positions_summary(const std::vector<std::size_t>& z, const std::vector<std::size_t>& x) {
  return std::to_string(z.size()) + " Z-check and " + std::to_string(x.size()) + " X-check positions";
}

inline CheckResult run_check(const AliceRecord& alice, const BobRecord& bob, const SessionConfig& cfg,
                             Transcript& transcript) {
  transcript.post(MessageKind::CheckPositions, "bob", positions_summary(bob.check_positions_z, bob.check_positions_x));
  transcript.post(MessageKind::CheckStateReveal, "alice",
                  "initial states of " + std::to_string(bob.check_positions_z.size() + bob.check_positions_x.size()) +
                      " check quartets");
  CheckResult r;
  auto tally = [&](const std::vector<std::size_t>& positions, MeasBasis basis, CheckTally& t) {
    for (std::size_t i : positions) {
      const int failures = check_consistency(alice.state_at(i, cfg.variant), basis, bob.outcomes.at(i)).failures();
      t.failed_pairs += static_cast<std::size_t>(failures);
      t.pairs += 2;
      ++t.quartets_failing[static_cast<std::size_t>(failures)];
    }
  };
  tally(bob.check_positions_x, MeasBasis::X, r.x);
  tally(bob.check_positions_z, MeasBasis::Z, r.z);
  r.eX = r.x.rate();
  r.eZ = r.z.rate();
  r.eA = 0.5 * (r.eX + r.eZ);
  r.abort = r.eA > cfg.abort_threshold;
  if (r.abort) transcript.post(MessageKind::Abort, "bob", "average check error rate above threshold");
  return r;
}

struct SiftResult {
  std::vector<KeyBit> alice_key;
  std::vector<KeyBit> bob_key;
  std::vector<std::size_t> positions;
  std::size_t inconsistent_count = 0;
};

/// Key extraction after Alice announces her spatial bases. Requires a passed
/// check; positions whose two pairs disagree are dropped from both keys.
inline SiftResult sift(const AliceRecord& alice, const BobRecord& bob, const CheckResult& check,
                       const SessionConfig& cfg, Transcript& transcript) {
  if (check.abort) throw ProtocolOrderError("sift: the check failed, the session must abort");
  transcript.post(MessageKind::BasisAnnouncement, "alice",
                  "spatial bases of " + std::to_string(alice.basis_bits.size()) + " quartets");
  SiftResult s;
  for (std::size_t i = 0; i < bob.roles.size(); ++i) {
    if (bob.roles[i] != PositionRole::Key) continue;
    const auto bit = decode_key(cfg.variant, alice.basis_bits.at(i), bob.outcomes.at(i));
    if (!bit) {
      ++s.inconsistent_count;
      continue;
    }
    s.positions.push_back(i);
    s.alice_key.push_back(alice.key_bits.at(i));
    s.bob_key.push_back(*bit);
  }
  return s;
}

/// Stand-in for reconciliation and privacy amplification; only logged.
inline void post_processing_stage(const SiftResult& s, Transcript& transcript) {
  transcript.post(MessageKind::PostProcessing, "both",
                  "raw key of " + std::to_string(s.bob_key.size()) +
                      " bits; error correction and privacy amplification not applied");
}

// ---------------------------------------------------------------------------
// Whole session

struct SessionResult {
  SessionConfig config;
  AttackKind attack;
  std::size_t quartets = 0;
  CheckResult check;
  double observed_eX = 0.0;
  double observed_eZ = 0.0;
  double observed_eA = 0.0;
  bool aborted = false;
  std::vector<KeyBit> alice_raw_key;
  std::vector<KeyBit> bob_raw_key;
  std::size_t inconsistent_count = 0;
  std::optional<EveReport> eve_stats;
  Transcript transcript;

  bool keys_agree() const { return !aborted && alice_raw_key == bob_raw_key; }
  double sifted_fraction() const {
    return quartets == 0 ? 0.0 : static_cast<double>(bob_raw_key.size()) / static_cast<double>(quartets);
  }
};

inline SessionResult run_session(const SessionConfig& cfg, const AttackKind& attack = AttackKind::none()) {
  validate(cfg);
  require_supported(cfg.variant, attack);
  Rng alice_rng = stream_rng(cfg.seed, Stream::Alice);
  Rng channel_rng = stream_rng(cfg.seed, Stream::Channel);
  Rng eve_rng = stream_rng(cfg.seed, Stream::Eve);
  Rng bob_rng = stream_rng(cfg.seed, Stream::Bob);

  SessionResult res;
  res.config = cfg;
  res.attack = attack;
  res.quartets = cfg.total();

  auto prep = alice_prepare(cfg, alice_rng);
  auto channel = transmit(cfg, attack, std::move(prep.quartets), channel_rng, eve_rng);
  const BobRecord bob = bob_measure(cfg, channel.quartets, bob_rng);

  res.check = run_check(prep.record, bob, cfg, res.transcript);
  res.observed_eX = res.check.eX;
  res.observed_eZ = res.check.eZ;
  res.observed_eA = res.check.eA;
  res.aborted = res.check.abort;
  if (!res.aborted) {
    auto s = sift(prep.record, bob, res.check, cfg, res.transcript);
    post_processing_stage(s, res.transcript);
    res.alice_raw_key = std::move(s.alice_key);
    res.bob_raw_key = std::move(s.bob_key);
    res.inconsistent_count = s.inconsistent_count;
  }
  // Eve's guesses are scored with Alice's basis string whether or not it was
  // announced; this is an analysis figure, not something Eve learns.
  if (attack.strategy != AttackStrategy::None)
    res.eve_stats = eve_finalize(channel.eve, prep.record.basis_bits, prep.record.key_bits);
  return res;
}

}  // namespace dfsqkd
