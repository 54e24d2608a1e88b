#include <random>

#include "chameleon/config_spec.hpp"
#include "chameleon/token_quorum.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace chameleon;

namespace {

constexpr ProcessId A{0}, B{1}, C{2}, D{3}, E{4};

TokenConfiguration fig2c() { return mimic_flexible(5, {{Token{B, 0}, D}}); }

}  // namespace

TEST_CASE("majority threshold") {
  CHECK(majority(1) == 1);
  CHECK(majority(3) == 2);
  CHECK(majority(4) == 3);
  CHECK(majority(5) == 3);
  CHECK(majority(7) == 4);
}

TEST_CASE("read quorum predicate") {
  CHECK(is_read_quorum(fig2c(), {A, D}));
  CHECK_FALSE(is_read_quorum(mimic_majority(5), {B}));
  CHECK(is_read_quorum(mimic_leader(5, A), {A}));
  CHECK_FALSE(is_read_quorum(mimic_leader(5, A), {B, C, D, E}));
  CHECK_THROWS_AS((void)is_read_quorum(mimic_majority(3), {D}), std::invalid_argument);
}

TEST_CASE("write quorum predicate") {
  CHECK(is_write_quorum(fig2c(), {A, D, E}));
  CHECK(is_write_quorum(fig2c(), {A, C, E}));
  CHECK(is_write_quorum(fig2c(), {C, D, E}));
  CHECK_FALSE(is_write_quorum(fig2c(), {A, B, C}));
  CHECK(owners_covered(fig2c(), {A, B, C}) == ProcessSet{A, C});

  const auto local = mimic_local(5);
  for (std::uint32_t skip = 0; skip < 5; ++skip) {
    auto s = ProcessSet::all(5);
    s.erase(ProcessId{skip});
    CHECK_FALSE(is_write_quorum(local, s));
  }
  CHECK(is_write_quorum(local, ProcessSet::all(5)));
  CHECK_THROWS_AS((void)is_write_quorum(local, {ProcessId{7}}), std::invalid_argument);
}

TEST_CASE("mimic constructors hold the expected tokens") {
  const auto leader = mimic_leader(5, A);
  CHECK(leader.held_count(A) == 5);
  for (auto p : {B, C, D, E}) CHECK(leader.held_count(p) == 0);
  CHECK(mimic_leader(1, A).held_count(A) == 1);

  const auto maj = mimic_majority(5);
  for (auto p : {A, B, C, D, E}) CHECK(maj.held_by(p) == TokenSet{Token{p, 0}});

  const auto flex = fig2c();
  CHECK(flex.held_count(D) == 2);
  CHECK(flex.held_count(B) == 0);
  CHECK(flex.held_by(D) == TokenSet{Token{B, 0}, Token{D, 0}});
  CHECK(mimic_flexible(5, {}).same_assignment(maj));
  CHECK_THROWS_AS((void)mimic_flexible(5, {{Token{B, 0}, D}, {Token{B, 0}, E}}), std::invalid_argument);
  CHECK_THROWS_AS((void)mimic_flexible(5, {{Token{B, 1}, D}}), std::invalid_argument);

  const auto local = mimic_local(5);
  for (auto p : {A, B, C, D, E}) {
    CHECK(local.held_count(p) == 5);
    CHECK(local.profile().tokens_owned(p) == 5);
  }
}

TEST_CASE("configuration invariants") {
  OwnershipProfile profile({1, 1, 1});
  CHECK_THROWS_AS(TokenConfiguration(profile, {{A}, {}, {C}}), InvalidConfiguration);
  CHECK_THROWS_AS(TokenConfiguration(profile, {{A}, {B, B}, {C}}), InvalidConfiguration);
  CHECK_THROWS_AS(TokenConfiguration(profile, {{A}, {ProcessId{3}}, {C}}), InvalidConfiguration);
  CHECK_THROWS_AS(OwnershipProfile({1, 0, 1}), std::invalid_argument);

  // B's token missing from the holder map.
  std::map<Token, ProcessId> holders{{Token{A, 0}, A}, {Token{C, 0}, C}, {Token{D, 0}, D}, {Token{E, 0}, E}};
  CHECK_THROWS_AS((void)TokenConfiguration::from_map(OwnershipProfile::uniform(5, 1), holders), InvalidConfiguration);
  holders[Token{B, 0}] = D;
  CHECK(TokenConfiguration::from_map(OwnershipProfile::uniform(5, 1), holders).same_assignment(fig2c()));
  holders[Token{B, 1}] = D;
  CHECK_THROWS_AS((void)TokenConfiguration::from_map(OwnershipProfile::uniform(5, 1), holders), InvalidConfiguration);
}

TEST_CASE("minimal quorums of the mimic constructors") {
  using oracle::k_subsets;
  using oracle::masks;

  CHECK(masks(minimal_read_quorums(mimic_leader(5, A))) == masks({{0}}));
  CHECK(masks(minimal_write_quorums(mimic_leader(5, A))) == k_subsets(5, 3, 0));

  CHECK(masks(minimal_read_quorums(mimic_majority(5))) == k_subsets(5, 3));
  CHECK(masks(minimal_write_quorums(mimic_majority(5))) == k_subsets(5, 3));
  CHECK(masks(minimal_read_quorums(mimic_majority(3))) == k_subsets(3, 2));
  CHECK(masks(minimal_write_quorums(mimic_majority(3))) == k_subsets(3, 2));

  CHECK(masks(minimal_read_quorums(fig2c())) == masks({{0, 2, 4}, {0, 3}, {2, 3}, {3, 4}}));

  CHECK(masks(minimal_read_quorums(mimic_local(5))) == k_subsets(5, 1));
  CHECK(masks(minimal_write_quorums(mimic_local(5))) == k_subsets(5, 5));

  for (const auto& c : {mimic_leader(5, A), mimic_majority(5), fig2c(), mimic_local(5)}) {
    CHECK(verify_intersection(c));
  }
}

TEST_CASE("enumeration refuses large clusters") {
  CHECK_NOTHROW((void)minimal_read_quorums(mimic_majority(kMaxEnumerationSize)));
  CHECK_THROWS_AS((void)minimal_read_quorums(mimic_majority(kMaxEnumerationSize + 1)), Unsupported);
  CHECK_THROWS_AS((void)verify_intersection(mimic_majority(kMaxEnumerationSize + 1)), Unsupported);
}

TEST_CASE("closest read quorum examples") {
  const auto lat = LatencyMatrix::uniform(5, 10);
  CHECK(closest_read_quorum(mimic_local(5), C, lat) == ProcessSet{C});
  CHECK(closest_read_quorum(mimic_majority(5), A, lat) == ProcessSet{A, B, C});
  CHECK(closest_read_quorum(mimic_majority(5), B, lat) == ProcessSet{A, B, C});
  CHECK(closest_read_quorum(mimic_majority(5), E, lat) == ProcessSet{A, B, E});
  CHECK(closest_read_quorum(fig2c(), A, lat) == ProcessSet{A, D});
  CHECK(closest_read_quorum(mimic_leader(5, A), B, lat) == ProcessSet{A});
  CHECK(closest_read_quorum(fig2c(), B, lat) == ProcessSet{A, D});
}

TEST_CASE("closest read quorum prefers nearby processes") {
  // A and B are close to each other, everyone else is far away.
  std::vector<std::vector<std::uint64_t>> m(5, std::vector<std::uint64_t>(5, 50));
  for (int i = 0; i < 5; ++i) m[i][i] = 0;
  m[0][1] = m[1][0] = 2;
  const LatencyMatrix lat(m);
  CHECK(closest_read_quorum(mimic_flexible(5, {{Token{C, 0}, B}}), A, lat) == ProcessSet{A, B});
  CHECK(closest_read_quorum(mimic_majority(5), A, lat) == ProcessSet{A, B, C});
}

TEST_CASE("config spec parsing") {
  CHECK(parse_transfer("B.0=D") == std::pair{Token{B, 0}, D});
  CHECK(parse_transfer("B->D") == std::pair{Token{B, 0}, D});
  CHECK_THROWS_AS((void)parse_transfer("B.0"), std::invalid_argument);
  CHECK(parse_preset("local") == Preset::local);
  CHECK_THROWS_AS((void)parse_preset("quorum"), std::invalid_argument);

  ConfigSpec spec{Preset::flexible, 5, A, {{Token{B, 0}, D}}};
  CHECK(spec.build().same_assignment(fig2c()));
  ConfigSpec bad{Preset::majority, 5, A, {{Token{B, 0}, D}}};
  CHECK_THROWS_AS((void)bad.build(), std::invalid_argument);
}

TEST_CASE("predicates agree with the brute-force oracle on random configurations") {
  std::mt19937_64 rng(11);
  for (std::uint32_t n : {1U, 2U, 3U, 4U, 5U, 6U}) {
    for (int trial = 0; trial < 60; ++trial) {
      const auto config = oracle::random_config(rng, n);
      const auto table = oracle::table_of(config);
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        REQUIRE(is_read_quorum(config, ProcessSet(m)) == oracle::read_ok(table, m));
        REQUIRE(is_write_quorum(config, ProcessSet(m)) == oracle::write_ok(table, m));
      }
      REQUIRE(oracle::masks(minimal_read_quorums(config)) ==
              oracle::minimal(n, [&](std::uint64_t m) { return oracle::read_ok(table, m); }));
      REQUIRE(oracle::masks(minimal_write_quorums(config)) ==
              oracle::minimal(n, [&](std::uint64_t m) { return oracle::write_ok(table, m); }));
    }
  }
}

TEST_CASE("token conservation and closest quorum validity on random configurations") {
  std::mt19937_64 rng(12);
  for (std::uint32_t n : {3U, 5U, 7U}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto config = oracle::random_config(rng, n);
      const auto lat = oracle::random_latency(rng, n);
      std::uint32_t held = 0;
      for (std::uint32_t p = 0; p < n; ++p) held += config.held_count(ProcessId{p});
      REQUIRE(held == config.profile().total_tokens());
      const auto table = oracle::table_of(config);
      for (std::uint32_t o = 0; o < n; ++o) {
        const auto q = closest_read_quorum(config, ProcessId{o}, lat);
        REQUIRE(is_read_quorum(config, q));
        REQUIRE(q.bits() == oracle::closest(table, o, lat));
      }
    }
  }
}

TEST_CASE("closest quorum falls back to a greedy cover on wide clusters") {
  const auto lat = LatencyMatrix::uniform(40, 10);
  for (std::uint32_t o : {0U, 17U, 39U}) {
    const auto q = closest_read_quorum(mimic_majority(40), ProcessId{o}, lat);
    CHECK(is_read_quorum(mimic_majority(40), q));
    CHECK(q.contains(ProcessId{o}));
    CHECK(q.size() == majority(40));
  }
}
