#include "chameleon/replica.hpp"
#include "cluster.hpp"
#include "doctest.h"

using namespace chameleon;
using testnet::Cluster;
using testnet::InFlight;
using testnet::is;

namespace {

constexpr ProcessId A{0}, B{1}, C{2}, D{3}, E{4};

TokenConfiguration b_at_d() { return mimic_flexible(5, {{Token{B, 0}, D}}); }

bool config_prepare(const InFlight& m) {
  const auto* p = std::get_if<msg::Prepare>(&m.message);
  return p && std::holds_alternative<ConfigEntry>(p->payload);
}

void propose(Cluster& net, const TokenConfiguration& next) { net.absorb(A, net.at(A).propose_config(next)); }

}  // namespace

TEST_CASE("proposal waits for outstanding writes") {
  Cluster net(mimic_majority(5));
  net.write(C, "x", "1");
  // Get the write prepared but hold back every P_ACK.
  net.deliver(net.take(is<msg::Write>).at(0));
  auto prepares = net.take(is<msg::Prepare>);
  for (auto& p : prepares) net.deliver(p);
  auto acks = net.take(is<msg::PrepareAck>);
  REQUIRE(acks.size() == 5);

  propose(net, mimic_leader(5, A));
  CHECK(net.raised<ConfigProposed>(A).empty());
  CHECK(net.take(config_prepare).empty());

  // A second client write is stalled without an index.
  net.write(D, "y", "1");
  net.deliver(net.take(is<msg::Write>).at(0));
  CHECK(net.raised<WriteIndexAssigned>(A).size() == 1);

  for (auto& a : acks) net.deliver(a);
  auto proposed = net.raised<ConfigProposed>(A);
  REQUIRE(proposed.size() == 1);
  CHECK(proposed[0].index == 2);
  CHECK(net.raised<WriteCommitted>(A).size() == 1);

  net.run();
  auto assigned = net.raised<WriteIndexAssigned>(A);
  REQUIRE(assigned.size() == 2);
  CHECK(assigned[1].index == 3);
  for (auto& r : net.replicas) {
    CHECK(r.config().version() == 2);
    CHECK(r.config_valid());
    CHECK(r.kv().at("y") == "1");
  }
}

TEST_CASE("configuration commit needs every process") {
  Cluster net(mimic_majority(5));
  propose(net, mimic_local(5));
  net.run([](const InFlight& m) { return !(is<msg::PrepareAck>(m) && m.from == E); });
  CHECK(net.raised<ConfigFullyAcked>(A).empty());
  CHECK(net.at(A).reconfiguring());
  CHECK_FALSE(net.at(E).config_valid());

  // A retransmitted PREPARE reaches E, which is already invalid and re-acks immediately.
  net.queue.push_back({A, E, msg::Prepare{1, ConfigEntry{mimic_local(5).with_version(1)}}});
  net.run();
  CHECK(net.raised<ConfigFullyAcked>(A).size() == 1);
  for (auto& r : net.replicas) CHECK(r.config().version() == 1);
}

TEST_CASE("invalid replicas park READ and PREPARE until the commit") {
  Cluster net(b_at_d());
  propose(net, mimic_leader(5, A));
  auto cfg = net.take(config_prepare);
  REQUIRE(cfg.size() == 5);
  auto to_d = cfg[3];
  REQUIRE(to_d.to == D);
  net.deliver(to_d);
  auto d_ack = net.take(is<msg::PrepareAck>);
  REQUIRE(d_ack.size() == 1);
  const auto& da = std::get<msg::PrepareAck>(d_ack[0].message);
  CHECK(da.index == 1);
  CHECK(da.tokens.empty());
  CHECK(da.config_version == 0);
  CHECK_FALSE(net.at(D).config_valid());

  // Duplicate config PREPARE: answered, nothing parked.
  net.deliver(to_d);
  CHECK(net.take(is<msg::PrepareAck>).size() == 1);
  CHECK(net.at(D).stalled_count() == 0);

  // READ from B to D is parked.
  net.deliver({B, D, msg::Read{42}});
  CHECK(net.take(is<msg::ReadAck>).empty());
  CHECK(net.at(D).stalled_count() == 1);
  // So is an application PREPARE.
  net.deliver({A, D, msg::Prepare{9, AppWrite{C, 1, Put{"x", "1"}}}});
  CHECK(net.take(is<msg::PrepareAck>).empty());
  CHECK(net.at(D).stalled_count() == 2);
  // And a client read submitted at D.
  net.read(D, "x");
  CHECK(net.at(D).stalled_count() == 3);

  // The COMMIT revalidates D; parked messages are answered from the new configuration.
  net.deliver({A, D, msg::Commit{1, ConfigEntry{mimic_leader(5, A).with_version(1)}}});
  CHECK(net.at(D).config_valid());
  CHECK(net.at(D).stalled_count() == 0);
  CHECK(net.at(D).held_tokens().empty());
  auto read_ack = net.take(is<msg::ReadAck>);
  REQUIRE(read_ack.size() == 1);
  const auto& ra = std::get<msg::ReadAck>(read_ack[0].message);
  CHECK(ra.config_version == 1);
  CHECK(ra.tokens.empty());
  auto prep_ack = net.take(is<msg::PrepareAck>);
  REQUIRE(prep_ack.size() == 1);
  CHECK(std::get<msg::PrepareAck>(prep_ack[0].message).config_version == 1);
  // D's own read now goes to A, the only read quorum.
  auto reads = net.take(is<msg::Read>);
  REQUIRE(reads.size() == 1);
  CHECK(reads[0].to == A);
}

TEST_CASE("adoption recomputes held tokens") {
  Cluster net(b_at_d());
  CHECK(net.at(D).held_tokens().size() == 2);
  CHECK(net.at(A).held_tokens().size() == 1);
  propose(net, mimic_leader(5, A));
  net.run();
  CHECK(net.at(D).held_tokens().empty());
  CHECK(net.at(A).held_tokens().size() == 5);
}

TEST_CASE("versions strictly increase across adoptions") {
  Cluster net(mimic_majority(5));
  std::vector<TokenConfiguration> sequence{mimic_leader(5, A), mimic_local(5), b_at_d(), mimic_majority(5)};
  for (const auto& next : sequence) {
    net.write(B, "x", "v");
    net.run();
    propose(net, next);
    net.run();
  }
  for (std::uint32_t p = 0; p < 5; ++p) {
    std::vector<std::uint64_t> versions;
    for (const auto& n : net.raised<ConfigAdopted>(ProcessId{p})) versions.push_back(n.version);
    REQUIRE(versions.size() == 4);
    CHECK(std::is_sorted(versions.begin(), versions.end()));
    CHECK(std::adjacent_find(versions.begin(), versions.end()) == versions.end());
    CHECK(net.at(ProcessId{p}).config().same_assignment(mimic_majority(5)));
  }
}

TEST_CASE("proposals are rejected when not applicable") {
  Cluster net(mimic_majority(5));
  auto follower = net.at(B).propose_config(mimic_local(5));
  CHECK(std::holds_alternative<ConfigRejected>(follower.notices.at(0)));
  auto wrong_size = net.at(A).propose_config(mimic_local(3));
  CHECK(std::holds_alternative<ConfigRejected>(wrong_size.notices.at(0)));
  propose(net, mimic_local(5));
  auto second = net.at(A).propose_config(mimic_leader(5, A));
  CHECK(std::holds_alternative<ConfigRejected>(second.notices.at(0)));
  // A doubly-held token never gets as far as a proposal.
  CHECK_THROWS_AS((void)mimic_flexible(5, {{Token{B, 0}, D}, {Token{B, 0}, E}}), std::invalid_argument);
}

TEST_CASE("switching majority to leader routes later reads to the leader") {
  Cluster net(mimic_majority(5));
  net.read(E, "x");
  auto first = net.take(is<msg::Read>);
  CHECK(first.size() == 3);
  for (auto& m : first) net.deliver(m);
  net.run();
  propose(net, mimic_leader(5, A));
  net.run();
  for (auto p : {B, C, D, E}) {
    net.read(p, "x");
    auto reads = net.take(is<msg::Read>);
    REQUIRE(reads.size() == 1);
    CHECK(reads[0].to == A);
    net.run();
  }
}

TEST_CASE("a reader restarts counting when it meets the new version") {
  Cluster net(mimic_majority(5), A, LatencyMatrix::uniform(5, 10), ReplicaOptions{ReadFanout::broadcast});
  net.write(B, "x", "1");
  net.run();
  net.read(E, "x");
  auto reads = net.take(is<msg::Read>);
  REQUIRE(reads.size() == 5);
  // A and B answer under version 0.
  net.deliver(reads[0]);
  net.deliver(reads[1]);
  for (auto& m : net.take(is<msg::ReadAck>)) net.deliver(m);
  // Reconfigure to local reads; then C answers under version 2.
  propose(net, mimic_local(5));
  net.run();
  net.deliver(reads[2]);
  auto c_ack = net.take(is<msg::ReadAck>);
  REQUIRE(c_ack.size() == 1);
  CHECK(std::get<msg::ReadAck>(c_ack[0].message).config_version == 2);
  net.deliver(c_ack[0]);
  auto fixed = net.raised<ReadIndexFixed>(E);
  REQUIRE(fixed.size() == 1);
  CHECK(fixed[0].config_version == 2);
  CHECK(fixed[0].counted_versions == std::vector<std::uint64_t>{2});
  CHECK(fixed[0].index == 2);
}
