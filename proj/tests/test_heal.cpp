#include <doctest.h>

#include <set>

#include "dime/errors.hpp"
#include "dime/heal.hpp"
#include "dime/oracle.hpp"
#include "helpers.hpp"

using namespace dime;

namespace {

TaspConfig small_config() {
  TaspConfig c;
  c.delta_count = 8;
  c.nsim = 256;
  return c;
}

// two triangles, node 0 and node 4 are hubs with p = 1 to their triangle
UncertainNetwork hub_triangles() {
  return UncertainNetwork(6, {{0, 1, 1.0, {}}, {0, 2, 1.0, {}}, {1, 2, 0.05, {}}, {2, 1, 0.05, {}},
                              {4, 3, 1.0, {}}, {4, 5, 1.0, {}}, {3, 5, 0.05, {}}, {5, 3, 0.05, {}}});
}

}  // namespace

TEST_CASE("two triangles: parts are the triangles, one node from each") {
  auto s = PlanSession::start(testing::two_triangles(), {2, 3, 1, PlannerMode::heal}, small_config(), 1);
  const auto& p = s.partitioning();
  CHECK(p.cut_weight == 0.0);
  CHECK(p.assignment[0] == p.assignment[2]);
  CHECK(p.assignment[3] != p.assignment[0]);
  const auto& rec = s.recommend();
  CHECK(rec.round == 1);
  CHECK(rec.action.size() == 2);
  REQUIRE(rec.provenance.size() == 2);
  std::set<std::size_t> parts;
  for (const auto& pick : rec.provenance) {
    REQUIRE(pick.nodes.size() == 1);
    CHECK(p.assignment[pick.nodes[0]] == pick.partition);
    parts.insert(pick.partition);
  }
  CHECK(parts.size() == 2);
}

TEST_CASE("hubs are recommended") {
  auto s = PlanSession::start(hub_triangles(), {2, 1, 1, PlannerMode::heal}, small_config(), 3);
  CHECK(s.recommend().action == ActionSet{0, 4});
}

TEST_CASE("K = 1 is plain TASP on the whole network") {
  const auto net = testing::ws(20, 4, 0.1, 0.3, 0.6, 0.5, 2);
  auto s = PlanSession::start(net, {1, 2, 1, PlannerMode::heal}, small_config(), 9);
  CHECK(s.partitioning().k == 1);
  CHECK(s.recommend().action == tasp_solve(net, 1, 2, 1, {}, small_config(), derive_seed(9ULL, 1, 0)).action);
}

TEST_CASE("isolated nodes: lowest ids") {
  const UncertainNetwork iso(4, {});
  auto s = PlanSession::start(iso, {1, 2, 1, PlannerMode::heal}, small_config(), 1);
  CHECK(s.recommend().action == ActionSet{0});
  s.record_execution(ActionSet{0}, {});
  CHECK(s.recommend().action == ActionSet{1});
}

TEST_CASE("start errors") {
  const UncertainNetwork five(5, {});
  CHECK_THROWS_AS(PlanSession::start(five, {6, 1, 1, PlannerMode::heal}, {}, 1), CapacityError);
  CHECK_THROWS_AS(PlanSession::start(five, {0, 1, 1, PlannerMode::heal}, {}, 1), ValidationError);
  CHECK_THROWS_AS(PlanSession::start(five, {1, 6, 1, PlannerMode::heal_t}, {}, 1), CapacityError);
  CHECK(parse_planner_mode("heal-t") == PlannerMode::heal_t);
  CHECK_THROWS_AS(parse_planner_mode("nope"), ValidationError);
}

TEST_CASE("exhausted session") {
  auto s = PlanSession::start(testing::two_triangles(), {2, 1, 1, PlannerMode::heal}, small_config(), 1);
  const auto a = s.recommend().action;
  const auto r = s.record_execution(a, {});
  CHECK(r.round == 1);
  CHECK(s.exhausted());
  CHECK_THROWS_AS(s.recommend(), StateError);
  CHECK_THROWS_AS(s.record_execution(a, {}), StateError);
}

TEST_CASE("record_execution validation") {
  auto s = PlanSession::start(testing::two_triangles(), {2, 2, 1, PlannerMode::heal}, small_config(), 1);
  CHECK_THROWS_AS(s.record_execution(ActionSet{1}, {}), ValidationError);
  CHECK_THROWS_AS(s.record_execution(ActionSet{1, 9}, {}), ValidationError);
  CHECK(s.round() == 1);
}

TEST_CASE("recommendation is cached and deterministic") {
  const auto net = testing::ws(30, 4, 0.1, 0.2, 0.6, 1.0, 5);
  auto a = PlanSession::start(net, {3, 4, 1, PlannerMode::heal}, small_config(), 77);
  auto b = PlanSession::start(net, {3, 4, 1, PlannerMode::heal}, small_config(), 77);
  const auto ra = a.recommend();
  CHECK(a.recommend() == ra);
  CHECK(b.recommend() == ra);
  auto serial_cfg = small_config();
  serial_cfg.execution = Execution::serial;
  auto c = PlanSession::start(net, {3, 4, 1, PlannerMode::heal}, serial_cfg, 77);
  CHECK(c.recommend() == ra);
}

TEST_CASE("observations update the network") {
  const auto net = testing::fig2();
  auto s = PlanSession::start(net, {2, 3, 1, PlannerMode::heal}, small_config(), 4);
  s.recommend();
  const std::vector<EdgeObservation> obs{{1, true}, {2, false}};
  const auto r = s.record_execution(ActionSet{1, 2}, obs);
  CHECK(r.uncertain_edges_remaining == 2);
  CHECK(r.unexpected_observations == 0);
  CHECK(s.network().has_edge(1, 4));
  CHECK_FALSE(s.network().find_uncertain(1, 4).has_value());
  CHECK_FALSE(s.network().has_edge(2, 5));
  CHECK(s.round() == 2);

  // edge 0 of the updated network is (0,1); observing it from {3,4} is unexpected
  const std::vector<EdgeObservation> extra{{0, true}};
  CHECK(s.record_execution(ActionSet{3, 4}, extra).unexpected_observations == 1);
}

TEST_CASE("no uncertain out-edges: network unchanged") {
  auto s = PlanSession::start(testing::two_triangles(), {2, 2, 1, PlannerMode::heal}, small_config(), 1);
  const auto before = s.network();
  const auto a = s.recommend().action;
  const auto r = s.record_execution(a, {});
  CHECK_FALSE(r.deviated);
  CHECK(s.network() == before);
  CHECK(s.round() == 2);
}

TEST_CASE("deviation is accepted and replanning uses the executed action") {
  const auto net = testing::ws(24, 4, 0.1, 0.3, 0.6, 0.5, 6);
  auto s = PlanSession::start(net, {2, 3, 1, PlannerMode::heal}, small_config(), 8);
  const auto rec = s.recommend().action;
  std::vector<NodeId> other;
  for (NodeId v = 0; v < 24 && other.size() < 2; ++v) {
    if (!rec.contains(v)) other.push_back(v);
  }
  const ActionSet executed(other);
  const auto r = s.record_execution(executed, {});
  CHECK(r.deviated);
  CHECK(s.history().rounds[0].recommended == rec);
  CHECK(s.history().rounds[0].executed == executed);

  std::set<NodeId> replayed;
  for (std::size_t part = 0; part < 2; ++part) {
    const auto sub = induced_subnetwork(s.network(), s.partitioning(), part);
    const auto ctx = s.context_for(sub);
    REQUIRE(ctx.executed_rounds.size() == 1);
    for (auto v : ctx.executed_rounds[0].nodes()) replayed.insert(sub.to_global[v]);
  }
  CHECK(replayed == std::set<NodeId>(other.begin(), other.end()));

  const auto next = s.recommend().action;
  for (auto v : other) {
    const auto part = s.partitioning().assignment[v];
    if (s.partitioning().members(part).size() > 1) CHECK_FALSE(next.contains(v));
  }
}

TEST_CASE("previously chosen nodes are not recommended again") {
  const auto net = testing::ws(16, 4, 0.1, 0.3, 0.6, 0.5, 1);
  auto s = PlanSession::start(net, {2, 4, 1, PlannerMode::heal}, small_config(), 2);
  std::set<NodeId> chosen;
  for (int t = 0; t < 4; ++t) {
    const auto a = s.recommend().action;
    for (auto v : a.nodes()) CHECK(chosen.insert(v).second);
    s.record_execution(a, {});
  }
}

TEST_CASE("exhausted part falls back to the least recently chosen node") {
  // 2 nodes, K = 2: each part has a single node
  const UncertainNetwork pair(2, {{0, 1, 0.5, {}}});
  auto s = PlanSession::start(pair, {2, 3, 1, PlannerMode::heal}, small_config(), 1);
  for (int t = 0; t < 3; ++t) {
    const auto a = s.recommend().action;
    CHECK(a == ActionSet{0, 1});
    s.record_execution(a, {});
  }
}

TEST_CASE("|E_u| non-increasing across rounds") {
  const auto net = testing::ws(30, 4, 0.1, 0.2, 0.6, 1.0, 3);
  HealStrategy strategy(PlanSession::start(net, {2, 4, 1, PlannerMode::heal}, small_config(), 3));
  Rng rng(1);
  const auto truth = GroundTruth::sample(net, rng);
  const auto result = run_episode(strategy, truth, 2, 4, 1, {}, 5);
  std::size_t last = net.uncertain_count();
  for (const auto& record : strategy.session().history().rounds) {
    std::size_t kept = 0;
    for (const auto& m : record.index_map) kept += m.has_value();
    CHECK(kept <= last);
    last = kept;
  }
  CHECK(result.rounds.size() == 4);
}

TEST_CASE("HEAL-T picks all K nodes from part t-1") {
  const auto net = testing::ws(30, 4, 0.1, 0.2, 0.6, 1.0, 3);
  auto s = PlanSession::start(net, {3, 4, 1, PlannerMode::heal_t}, small_config(), 6);
  CHECK(s.partitioning().k == 4);
  for (std::size_t t = 1; t <= 4; ++t) {
    const auto rec = s.recommend();
    REQUIRE(rec.provenance.size() == 1);
    CHECK(rec.provenance[0].partition == t - 1);
    CHECK(rec.action.size() == 3);
    for (auto v : rec.action.nodes()) CHECK(s.partitioning().assignment[v] == t - 1);
    s.record_execution(rec.action, {});
  }
}

TEST_CASE("HEAL-T part smaller than K") {
  const UncertainNetwork net(6, {});
  auto s = PlanSession::start(net, {3, 3, 1, PlannerMode::heal_t}, small_config(), 1);
  CHECK_THROWS_AS(s.recommend(), CapacityError);
}

TEST_CASE("run_policy") {
  const auto zero = testing::ws(20, 4, 0.1, 0.0, 0.6, 0.5, 1);
  const auto r0 = run_policy(zero, {2, 3, 1, PlannerMode::heal}, small_config(), 1);
  CHECK(r0.indirect == 0);
  CHECK(r0.total_influenced == 6);

  const auto net = testing::ws(30, 4, 0.1, 0.3, 0.6, 0.5, 2);
  const auto a = run_policy(net, {2, 3, 1, PlannerMode::heal}, small_config(), 5);
  const auto b = run_policy(net, {2, 3, 1, PlannerMode::heal}, small_config(), 5);
  CHECK(a.total_influenced == b.total_influenced);
  REQUIRE(a.rounds.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(a.rounds[t].executed == b.rounds[t].executed);
    CHECK(a.rounds[t].observations == b.rounds[t].observations);
    CHECK(a.rounds[t].influenced == b.rounds[t].influenced);
  }
}

TEST_CASE("HEAL is close to the optimal policy on small instances") {
  const UncertainNetwork net(6, {{0, 1, 0.9, {}}, {0, 2, 0.9, 0.5}, {3, 4, 0.9, {}}, {3, 5, 0.9, 0.6},
                                 {1, 2, 0.3, {}}, {4, 5, 0.3, 0.4}});
  const std::size_t K = 2, T = 2, L = 1;
  const double opt = brute_force_policy_value(net, K, T, L).value;
  auto cache = std::make_shared<testing::MemoHeal::Cache>();
  const auto start = PlanSession::start(net, {K, T, L, PlannerMode::heal}, {}, 11);
  double total = 0.0;
  const int episodes = 2000;
  for (int e = 0; e < episodes; ++e) {
    testing::MemoHeal strategy(start, cache);
    Rng rng(derive_seed(100, e));
    const auto truth = GroundTruth::sample(net, rng);
    total += double(run_episode(strategy, truth, K, T, L, {}, derive_seed(200, e)).total_influenced);
  }
  CHECK(total / episodes >= 0.9 * opt);
}
