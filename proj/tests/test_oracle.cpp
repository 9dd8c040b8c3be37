#include <catch_amalgamated.hpp>

#include <numbers>

#include "dfsqkd/oracle.hpp"

using namespace dfsqkd;
using Catch::Approx;

namespace {

constexpr double kTol = 1e-12;

}  // namespace

TEST_CASE("BranchWalker enumerates every weighted path once", "[oracle]") {
  std::vector<std::pair<double, std::string>> leaves;
  const std::array<double, 3> w3 = {0.5, 0.0, 0.5};
  const std::array<double, 2> w2 = {0.25, 0.75};
  const auto count = enumerate_branches(
      [&](BranchWalker& w) {
        const auto a = w.pick(w3);
        std::string path = std::to_string(a);
        if (a == 0) path += std::to_string(w.pick(w2));
        return path;
      },
      [&](double p, const std::string& path) { leaves.emplace_back(p, path); });
  REQUIRE(count == 3);
  CHECK(leaves[0].second == "00");
  CHECK(leaves[0].first == Approx(0.125));
  CHECK(leaves[1].second == "01");
  CHECK(leaves[1].first == Approx(0.375));
  CHECK(leaves[2].second == "2");
  CHECK(leaves[2].first == Approx(0.5));
}

TEST_CASE("exact_error_rates reproduces both tables", "[oracle]") {
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& row : reproduce_table(v)) {
      INFO(to_string(v) << " " << attack_id(row.attack));
      CHECK(row.computed.eX == Approx(row.published.eX).margin(kTableTolerance));
      CHECK(row.computed.eZ == Approx(row.published.eZ).margin(kTableTolerance));
      CHECK(row.computed.eA == Approx(0.5 * (row.computed.eX + row.computed.eZ)).margin(kTol));
      const bool printed_typo = v == Variant::Dephasing && row.attack.strategy == AttackStrategy::BellResend;
      CHECK(row.match == !printed_typo);
    }
  }
  const auto bell = exact_error_rates(Variant::Dephasing, AttackKind::bell_resend());
  CHECK(bell.eA == Approx(0.1875).margin(kTol));
}

TEST_CASE("branch probabilities sum to one", "[oracle][property]") {
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      for (double p : {0.3, 1.0}) {
        const auto rep = analyze_attack(v, k.with_probability(p));
        INFO(to_string(v) << " " << attack_id(k) << " p=" << p);
        CHECK(rep.total_probability == Approx(1.0).margin(kTol));
        CHECK(rep.branch_count >= 4);
      }
    }
  }
}

TEST_CASE("rates scale linearly with the interception probability", "[oracle][property]") {
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      const auto full = exact_error_rates(v, k);
      for (double p : {0.0, 0.25, 0.6}) {
        const auto part = exact_error_rates(v, k.with_probability(p));
        CHECK(part.eX == Approx(p * full.eX).margin(kTol));
        CHECK(part.eZ == Approx(p * full.eZ).margin(kTol));
      }
    }
  }
}

TEST_CASE("rotation X and Z attacks are mirror images", "[oracle][property]") {
  const auto v = Variant::Rotation;
  const auto mrp_x = exact_error_rates(v, AttackKind::measure_resend_product(MeasBasis::X));
  const auto mrp_z = exact_error_rates(v, AttackKind::measure_resend_product(MeasBasis::Z));
  CHECK(mrp_x.eX == Approx(mrp_z.eZ).margin(kTol));
  CHECK(mrp_x.eZ == Approx(mrp_z.eX).margin(kTol));
  const auto mre_x = exact_error_rates(v, AttackKind::measure_resend_entangled(MeasBasis::X));
  const auto mre_z = exact_error_rates(v, AttackKind::measure_resend_entangled(MeasBasis::Z));
  CHECK(mre_x.eX == Approx(mre_z.eZ).margin(kTol));
  CHECK(mre_x.eZ == Approx(mre_z.eX).margin(kTol));
}

TEST_CASE("no supported attack goes below the detectability floor", "[oracle][property]") {
  double floor = 1.0;
  for (Variant v : {Variant::Dephasing, Variant::Rotation})
    for (const auto& k : table_rows(v)) floor = std::min(floor, exact_error_rates(v, k).eA);
  CHECK(floor >= 0.125 - kTol);
  CHECK(floor == Approx(0.125).margin(kTol));
}

TEST_CASE("collective noise does not change the exact rates", "[oracle][property]") {
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      INFO(to_string(v) << " " << attack_id(k));
      const auto quiet = exact_error_rates(v, k);
      // Noise ahead of Eve only meets Alice's protected codewords.
      const auto before = exact_error_rates(v, k, OracleOptions{0.77, 1.0});
      CHECK(before.eX == Approx(quiet.eX).margin(kTol));
      CHECK(before.eZ == Approx(quiet.eZ).margin(kTol));
      // Noise after Eve is harmless when she resends codewords or invariant Bell pairs.
      if (k.strategy == AttackStrategy::MeasureResendEntangled || k.strategy == AttackStrategy::BellResend) {
        const auto after = exact_error_rates(v, k, OracleOptions{1.234, 0.0});
        CHECK(after.eX == Approx(quiet.eX).margin(kTol));
        CHECK(after.eZ == Approx(quiet.eZ).margin(kTol));
      }
    }
  }
}

TEST_CASE("eve_information", "[oracle]") {
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      const auto info = eve_information(v, k);
      REQUIRE(info.pre_accuracy.has_value());
      REQUIRE(info.post_accuracy.has_value());
      CHECK(*info.pre_accuracy >= 0.5 - kTol);
      CHECK(*info.post_accuracy >= *info.pre_accuracy - kTol);
      CHECK(*info.post_accuracy <= 1.0 + kTol);
    }
  }
  const auto mrp = eve_information(Variant::Dephasing, AttackKind::measure_resend_product(MeasBasis::X));
  CHECK(*mrp.post_accuracy == Approx(1.0).margin(kTol));
  CHECK(*mrp.pre_accuracy == Approx(0.75).margin(kTol));
  const auto none = eve_information(Variant::Dephasing, AttackKind::none());
  CHECK_FALSE(none.pre_accuracy.has_value());
}

TEST_CASE("clustered_standard_error", "[oracle]") {
  CheckTally t;
  CHECK(clustered_standard_error(t) == 0.0);
  t.quartets_failing = {50, 0, 50};
  // values 0 or 1 with mean 1/2: sd 1/2 over 100 quartets.
  CHECK(clustered_standard_error(t) == Approx(0.05));
  t.quartets_failing = {0, 100, 0};
  CHECK(clustered_standard_error(t) == Approx(0.0).margin(kTol));
}

TEST_CASE("Monte Carlo agrees with the exact rates", "[oracle][property]") {
  std::uint64_t seed = 900;
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    for (const auto& k : table_rows(v)) {
      const auto exact = exact_error_rates(v, k);
      const auto mc = mc_error_rates(v, k, 20000, ++seed);
      INFO(to_string(v) << " " << attack_id(k) << " mc=" << mc.rates.eX << "," << mc.rates.eZ);
      CHECK(mc.trials == 20000);
      CHECK(std::abs(mc.rates.eX - exact.eX) <= 4 * mc.se_x + 1e-12);
      CHECK(std::abs(mc.rates.eZ - exact.eZ) <= 4 * mc.se_z + 1e-12);
    }
  }
}

TEST_CASE("Monte Carlo is deterministic and noise independent", "[oracle]") {
  const auto k = AttackKind::bell_resend();
  const auto a = mc_error_rates(Variant::Rotation, k, 3000, 5);
  const auto b = mc_error_rates(Variant::Rotation, k, 3000, 5);
  CHECK(a.rates.eX == b.rates.eX);
  CHECK(a.rates.eZ == b.rates.eZ);
  CHECK(a.sessions == 3);

  McOptions noisy;
  noisy.noise_policy = UniformNoise{0.0, 2 * std::numbers::pi};
  const auto c = mc_error_rates(Variant::Rotation, k, 3000, 5, noisy);
  const auto exact = exact_error_rates(Variant::Rotation, k);
  CHECK(std::abs(c.rates.eA - exact.eA) <= 4 * c.se_a);

  CHECK_THROWS_AS(mc_error_rates(Variant::Rotation, k, 0, 5), std::invalid_argument);
}

TEST_CASE("sweep_interception", "[oracle]") {
  const auto pts = sweep_interception(Variant::Dephasing, AttackKind::measure_resend_product(MeasBasis::X), 4000, 3);
  REQUIRE(pts.size() == 5);
  CHECK(pts.front().estimate.rates.eA == 0.0);
  for (const auto& pt : pts) {
    const double expected = 0.5 * pt.probability;
    CHECK(std::abs(pt.estimate.rates.eZ - expected) <= 4 * pt.estimate.se_z + 1e-12);
    CHECK(pt.estimate.rates.eX == 0.0);
  }
}
