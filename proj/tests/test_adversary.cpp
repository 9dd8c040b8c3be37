#include <catch_amalgamated.hpp>

#include <map>
#include <set>

#include "dfsqkd/adversary.hpp"
#include "dfsqkd/oracle.hpp"
#include "support.hpp"

using namespace dfsqkd;
using Catch::Approx;

namespace {

constexpr double kTol = 1e-12;

StateVector cw(Variant v, SpatialBasis sb, int bit) { return build_codeword({v, sb, bit}); }

}  // namespace

TEST_CASE("attack ids round-trip", "[adversary]") {
  for (const char* id : {"none", "mrp-x", "mrp-z", "mre-x", "mre-z", "bell", "cnot-x", "cnot-z"})
    CHECK(attack_id(parse_attack_id(id)) == id);
  CHECK_THROWS_AS(parse_attack_id("mitm"), std::invalid_argument);
}

TEST_CASE("unsupported rows are rejected", "[adversary]") {
  Rng rng(1);
  const auto s = cw(Variant::Dephasing, SpatialBasis::Neighboring, 0);
  CHECK_THROWS_AS(attack_quartet(AttackKind::measure_resend_product(MeasBasis::Z), Variant::Dephasing, s, rng),
                  UnsupportedAttack);
  CHECK_THROWS_AS(attack_quartet(AttackKind::cnot_parity(MeasBasis::Z), Variant::Dephasing, s, rng),
                  UnsupportedAttack);
  CHECK_THROWS_AS(attack_quartet(AttackKind::cnot_parity(MeasBasis::X), Variant::Rotation, s, rng),
                  UnsupportedAttack);
  CHECK_THROWS_AS(attack_quartet(AttackKind::bell_resend().with_probability(1.5), Variant::Rotation, s, rng),
                  UnsupportedAttack);
  CHECK(table_rows(Variant::Dephasing).size() == 4);
  CHECK(table_rows(Variant::Rotation).size() == 6);
  for (Variant v : {Variant::Dephasing, Variant::Rotation})
    for (const auto& k : table_rows(v)) CHECK(is_supported(v, k));
}

TEST_CASE("no attack forwards the quartet bit-exactly", "[adversary]") {
  Rng rng(2);
  const auto s = cw(Variant::Rotation, SpatialBasis::Crossing, 1);
  const auto out = attack_quartet(AttackKind::none(), Variant::Rotation, s, rng);
  for (std::size_t i = 0; i < s.dim(); ++i) CHECK(out.state[i] == s[i]);
  CHECK_FALSE(out.note.intercepted);

  const auto skipped = attack_quartet(AttackKind::bell_resend().with_probability(0.0), Variant::Rotation, s, rng);
  for (std::size_t i = 0; i < s.dim(); ++i) CHECK(skipped.state[i] == s[i]);
}

TEST_CASE("CNOT parity attack on Psi_dp0", "[adversary]") {
  Rng rng(3);
  const auto psi0 = cw(Variant::Dephasing, SpatialBasis::Neighboring, 0);
  for (int k = 0; k < 200; ++k) {
    const auto out = attack_quartet(AttackKind::cnot_parity(MeasBasis::X), Variant::Dephasing, psi0, rng);
    REQUIRE(out.note.ancilla_bit == 0);
    REQUIRE(fidelity(out.state, psi0) == Approx(1.0).margin(kTol));
  }
  // Phi_dp0 = a + c collapses onto one term: fidelity 1/2 with the original.
  const auto phi0 = cw(Variant::Dephasing, SpatialBasis::Crossing, 0);
  const auto out = attack_quartet(AttackKind::cnot_parity(MeasBasis::X), Variant::Dephasing, phi0, rng);
  CHECK(fidelity(out.state, phi0) == Approx(0.5).margin(kTol));
}

TEST_CASE("CNOT parity on photons 2 and 4 spares the crossing basis", "[adversary]") {
  Rng rng(4);
  AttackKind k = AttackKind::cnot_parity(MeasBasis::X);
  k.cnot_pair = CnotPair::Photons24;
  for (int bit : {0, 1}) {
    const auto phi = cw(Variant::Dephasing, SpatialBasis::Crossing, bit);
    const auto out = attack_quartet(k, Variant::Dephasing, phi, rng);
    CHECK(out.note.ancilla_bit == bit);
    CHECK(fidelity(out.state, phi) == Approx(1.0).margin(kTol));
  }
  const auto rates = exact_error_rates(Variant::Dephasing, k);
  CHECK(rates.eX == Approx(0.0).margin(1e-12));
  CHECK(rates.eZ == Approx(0.25).margin(1e-12));
}

TEST_CASE("measure-resend product on Psi_dp0", "[adversary]") {
  Rng rng(5);
  const auto psi0 = cw(Variant::Dephasing, SpatialBasis::Neighboring, 0);
  std::map<std::string, int> counts;
  const int trials = 8000;
  for (int k = 0; k < trials; ++k) {
    const auto out =
        attack_quartet(AttackKind::measure_resend_product(MeasBasis::X), Variant::Dephasing, psi0, rng);
    const std::string s = out.note.measured->str();
    ++counts[s];
    REQUIRE(out.note.resent == "product:" + s);
    REQUIRE(testsupport::brute_probability(out.state, s) == Approx(1.0).margin(kTol));
  }
  REQUIRE(counts.size() == 4);
  for (const char* s : {"++++", "----", "++--", "--++"})
    CHECK(std::abs(counts[s] - trials / 4) < 4 * std::sqrt(trials * 0.25 * 0.75));
}

TEST_CASE("measure-resend entangled sends one of the two consistent codewords", "[adversary]") {
  Rng rng(6);
  const auto psi0 = cw(Variant::Dephasing, SpatialBasis::Neighboring, 0);
  std::set<std::string> seen;
  for (int k = 0; k < 400; ++k) {
    const auto out =
        attack_quartet(AttackKind::measure_resend_entangled(MeasBasis::X), Variant::Dephasing, psi0, rng);
    const std::string s = out.note.measured->str();
    // a-strings sit in Psi0 and Phi0; b-strings in Psi0 and Phi1.
    const bool a_term = s == "++++" || s == "----";
    if (a_term) REQUIRE((out.note.resent == "codeword:Psi0" || out.note.resent == "codeword:Phi0"));
    else REQUIRE((out.note.resent == "codeword:Psi0" || out.note.resent == "codeword:Phi1"));
    seen.insert(out.note.resent);
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("Bell attack detects a wrong pairing half the time", "[adversary]") {
  // Exact: Phi_dp0 measured on pairs (1,2),(3,4) gives phi+- with probability 1/2.
  const auto phi0 = cw(Variant::Dephasing, SpatialBasis::Crossing, 0);
  const auto p = bell_probabilities(phi0, 0, 1);
  CHECK(p[0] + p[1] == Approx(0.5).margin(kTol));

  double detected = 0.0;
  double total = 0.0;
  enumerate_branches(
      [&](BranchWalker& w) { return attack_quartet(AttackKind::bell_resend(), Variant::Dephasing, phi0, w).note; },
      [&](double prob, const EveNote& note) {
        if (note.guessed_pairing != SpatialBasis::Neighboring) return;
        total += prob;
        if (note.detected_wrong_pairing) detected += prob;
      });
  CHECK(detected / total == Approx(0.5).margin(kTol));

  SECTION("a detected mistake is followed by a codeword of the other pairing") {
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
      const auto out = attack_quartet(AttackKind::bell_resend(), Variant::Dephasing, phi0, rng);
      if (!out.note.detected_wrong_pairing) continue;
      REQUIRE(out.note.guessed_pairing == SpatialBasis::Neighboring);
      REQUIRE(out.note.resent.rfind("codeword:Phi", 0) == 0);
    }
  }
}

TEST_CASE("every strategy outputs a normalized quartet", "[adversary][property]") {
  Rng rng(8);
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      for (int trial = 0; trial < 50; ++trial) {
        const auto s = testsupport::random_state(4, rng);
        const auto out = attack_quartet(k, v, s, rng);
        REQUIRE(out.state.num_qubits() == 4);
        REQUIRE(std::abs(out.state.norm2() - 1.0) < kTol);
      }
    }
  }
}

TEST_CASE("eve_finalize uses only the committed guesses", "[adversary]") {
  EveRecord record(3);
  record[0].intercepted = true;
  record[0].guess_by_basis = {1, 0};
  record[0].pre_guess = 1;
  record[2].intercepted = true;
  record[2].guess_by_basis = {0, 1};
  record[2].pre_guess = 0;
  const std::vector<SpatialBasis> announced = {SpatialBasis::Crossing, SpatialBasis::Neighboring,
                                               SpatialBasis::Crossing};
  const std::vector<KeyBit> key = {0, 1, 1};
  const auto rep = eve_finalize(record, announced, key);
  CHECK(rep.intercepted == 2);
  CHECK(rep.guesses[0] == 0);
  CHECK_FALSE(rep.guesses[1].has_value());
  CHECK(rep.guesses[2] == 1);
  CHECK(*rep.post_accuracy == Approx(1.0));
  CHECK(*rep.pre_accuracy == Approx(0.0));

  const auto empty = eve_finalize(EveRecord(3), announced, key);
  CHECK_FALSE(empty.pre_accuracy.has_value());
  CHECK_FALSE(empty.post_accuracy.has_value());

  const std::vector<KeyBit> short_key = {0};
  CHECK_THROWS_AS(eve_finalize(record, announced, short_key), std::invalid_argument);
}

TEST_CASE("Eve's guess is fixed before the announcement", "[adversary][property]") {
  // Replaying an attack with the same random stream gives the same two committed
  // guesses; finalizing under either announcement only selects one of them.
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      Rng a(55), b(55);
      const auto s = cw(v, SpatialBasis::Crossing, 1);
      const auto na = attack_quartet(k, v, s, a).note;
      const auto nb = attack_quartet(k, v, s, b).note;
      REQUIRE(na.guess_by_basis == nb.guess_by_basis);
      const EveRecord rec = {na};
      const std::vector<KeyBit> key = {1};
      for (SpatialBasis sb : kSpatialBases) {
        const std::vector<SpatialBasis> ann = {sb};
        REQUIRE(eve_finalize(rec, ann, key).guesses[0] == na.guess_by_basis[static_cast<std::size_t>(sb)]);
      }
    }
  }
}
