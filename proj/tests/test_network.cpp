#include <doctest.h>

#include <cmath>

#include "dime/errors.hpp"
#include "dime/network.hpp"
#include "helpers.hpp"

using namespace dime;

TEST_CASE("load_network: empty document") {
  const auto r = load_network(R"({"n_nodes": 0, "edges": []})");
  CHECK(r.network.node_count() == 0);
  CHECK(r.network.edge_count() == 0);
}

TEST_CASE("load_network: fig2 edge split") {
  const auto net = testing::fig2();
  CHECK(net.node_count() == 6);
  CHECK(net.edge_count() == 7);
  CHECK(net.certain_edges().size() == 3);
  CHECK(net.uncertain_count() == 4);
  CHECK(net.labels().at(1) == "B");
}

TEST_CASE("load_network: validation") {
  CHECK_THROWS_AS(load_network(R"({"n_nodes": 2, "edges": [{"src":0,"dst":1,"p":1.3}]})"), ValidationError);
  CHECK_THROWS_AS(load_network(R"({"n_nodes": 2, "edges": [{"src":0,"dst":2,"p":0.3}]})"), ValidationError);
  CHECK_THROWS_AS(load_network(R"({"n_nodes": 2, "edges": [{"src":0,"dst":0,"p":0.3}]})"), ValidationError);
  CHECK_THROWS_AS(load_network(R"({"n_nodes": 2, "edges": [{"src":0,"dst":1,"p":0.3},{"src":0,"dst":1,"p":0.2}]})"),
                  ValidationError);
  CHECK_THROWS_AS(load_network(R"({"n_nodes": 2, "edges": [{"src":0,"dst":1,"p":0.3,"u":1.5}]})"), ValidationError);
  CHECK_THROWS_AS(load_network("{not json"), ValidationError);
}

TEST_CASE("load_network: u = 1 promoted, u = 0 dropped") {
  const auto r = load_network(R"({"n_nodes": 3, "edges": [
      {"src":0,"dst":1,"p":0.3,"u":1.0}, {"src":1,"dst":2,"p":0.3,"u":0.0}, {"src":2,"dst":0,"p":0.3,"u":0.4}]})");
  CHECK(r.promoted_to_certain == 1);
  CHECK(r.dropped_zero_u == 1);
  CHECK(r.network.certain_edges().size() == 1);
  CHECK(r.network.uncertain_count() == 1);
  CHECK_FALSE(r.network.has_edge(1, 2));
}

TEST_CASE("serialization round trip") {
  const auto net = testing::ws(30, 4, 0.2, 0.1, 0.6, 0.5, 7);
  const auto back = load_network(network_to_json(net)).network;
  CHECK(back == net);
  for (std::size_t i = 0; i < net.uncertain_count(); ++i) CHECK(back.uncertain_edge(i) == net.uncertain_edge(i));
  const auto f2 = testing::fig2();
  CHECK(load_network(network_to_json(f2)).network.labels() == f2.labels());
  CHECK(network_to_csv(f2).rfind("src,dst,p,u\n", 0) == 0);
}

TEST_CASE("threshold_filter") {
  const std::vector<CandidateEdge> c{{0, 1, 0.2, 0.1}, {1, 2, 0.6, 0.1}, {2, 0, 0.9, 0.1}};
  const auto kept = threshold_filter(c, 0.5);
  REQUIRE(kept.size() == 2);
  CHECK(*kept[0].u == 0.6);
  CHECK(*kept[1].u == 0.9);
  CHECK(threshold_filter(c, 1.0).empty());
  CHECK(threshold_filter(c, 0.0).size() == 3);
  const std::vector<CandidateEdge> zero{{0, 1, 0.0, 0.1}};
  CHECK(threshold_filter(zero, 0.0).empty());
}

TEST_CASE("sample_instantiation frequencies") {
  const UncertainNetwork one(2, {{0, 1, 0.5, 0.6}});
  Rng rng(11);
  int kept = 0;
  for (int i = 0; i < 10000; ++i) kept += sample_instantiation(one, rng).kept[0];
  CHECK(kept >= 5800);
  CHECK(kept <= 6200);

  const UncertainNetwork near(2, {{0, 1, 0.5, 1.0 - 1e-12}});
  int near_kept = 0;
  for (int i = 0; i < 10000; ++i) near_kept += sample_instantiation(near, rng).kept[0];
  CHECK(near_kept >= 9999);

  const auto certain = testing::path_network(4, 0.3);
  const auto inst = sample_instantiation(certain, rng);
  CHECK(inst.kept.empty());
  CHECK(inst.log_probability == 0.0);
}

TEST_CASE("keep frequency converges for every edge") {
  const auto net = testing::ws(20, 4, 0.1, 0.2, 0.35, 0.6, 3);
  const std::size_t S = 20000;
  std::vector<std::size_t> counts(net.uncertain_count(), 0);
  Rng rng(5);
  for (std::size_t s = 0; s < S; ++s) {
    const auto inst = sample_instantiation(net, rng);
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += inst.kept[i];
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double u = *net.uncertain_edge(i).u;
    CHECK(std::abs(double(counts[i]) / S - u) <= 4.0 * std::sqrt(u * (1 - u) / S));
  }
}

TEST_CASE("instantiation_log_probability") {
  const UncertainNetwork net(3, {{0, 1, 0.5, 0.6}, {1, 2, 0.5, 0.6}});
  CHECK(instantiation_log_probability(net, {1, 1}) == doctest::Approx(std::log(0.36)));
  const UncertainNetwork single(2, {{0, 1, 0.5, 0.6}});
  CHECK(instantiation_log_probability(single, {0}) == doctest::Approx(std::log(0.4)));
  CHECK(instantiation_log_probability(testing::path_network(3), {}) == 0.0);
  Rng rng(2);
  const auto inst = sample_instantiation(net, rng);
  CHECK(inst.log_probability == doctest::Approx(instantiation_log_probability(net, inst.kept)));
}

TEST_CASE("apply_observations") {
  const auto net = testing::fig2();
  // Θ({B,C}) in file order is uncertain edges 1 and 2
  const std::vector<EdgeObservation> obs{{1, true}, {2, false}};
  const auto up = apply_observations(net, obs);
  CHECK(up.network.certain_edges().size() == 4);
  CHECK(up.network.uncertain_count() == 2);
  CHECK(up.network.has_edge(1, 4));
  CHECK_FALSE(up.network.has_edge(2, 5));
  CHECK(up.index_map == std::vector<std::optional<std::size_t>>{0, std::nullopt, std::nullopt, 1});
  for (const auto& e : up.network.all_edges()) CHECK(e.p == 0.5);

  CHECK(apply_observations(net, {}).network == net);

  std::vector<EdgeObservation> absent;
  for (std::size_t i = 0; i < 4; ++i) absent.push_back({i, false});
  const auto gone = apply_observations(net, absent);
  CHECK(gone.network.uncertain_count() == 0);
  CHECK(gone.network.edge_count() == 3);

  const std::vector<EdgeObservation> dup{{1, true}, {1, false}};
  CHECK_THROWS_AS(apply_observations(net, dup), ValidationError);
  const std::vector<EdgeObservation> range{{4, true}};
  CHECK_THROWS_AS(apply_observations(net, range), ValidationError);
}

TEST_CASE("watts strogatz") {
  Rng rng(1);
  const auto ring = generate_watts_strogatz(20, 4, 0.0, rng);
  for (NodeId v = 0; v < 20; ++v) CHECK(ring.out_degree(v) == 4);
  CHECK(ring.uncertain_count() == 0);

  int connected = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng r(s);
    connected += is_weakly_connected(generate_watts_strogatz(60, 6, 0.1, r));
  }
  CHECK(connected >= 95);

  Rng odd(4);
  const auto seven = generate_watts_strogatz(30, 7, 0.0, odd);
  for (NodeId v = 0; v < 30; ++v) CHECK(seven.out_degree(v) == 7);

  CHECK_THROWS_AS(generate_watts_strogatz(6, 6, 0.1, rng), ValidationError);
  CHECK_THROWS_AS(generate_watts_strogatz(10, 2, 1.5, rng), ValidationError);
}

TEST_CASE("decorate_uniform") {
  Rng rng(9);
  const auto base = generate_watts_strogatz(40, 4, 0.1, rng);
  const auto none = decorate_uniform(base, 0.1, 0.6, 0.0, rng);
  CHECK(none.uncertain_count() == 0);
  const auto all = decorate_uniform(base, 0.1, 0.6, 1.0, rng);
  CHECK(all.uncertain_count() == base.edge_count());
  const auto some = decorate_uniform(base, 0.1, 0.6, 0.3, rng);
  CHECK(some.uncertain_count() == static_cast<std::size_t>(std::lround(0.3 * base.edge_count())));
  for (const auto& e : some.all_edges()) {
    CHECK(e.p == 0.1);
    if (e.u) CHECK(*e.u == 0.6);
  }
}

TEST_CASE("certainty_equivalent") {
  const UncertainNetwork net(3, {{0, 1, 0.1, 0.6}, {1, 2, 0.1, {}}});
  const auto ce = certainty_equivalent(net);
  CHECK(ce.uncertain_count() == 0);
  CHECK(ce.node_count() == 3);
  CHECK(ce.edge_count() == 2);
  for (const auto& e : ce.all_edges()) {
    if (e.src == 0) CHECK(e.p == doctest::Approx(0.06));
    else CHECK(e.p == 0.1);
  }
  const auto promoted = load_network(R"({"n_nodes":2,"edges":[{"src":0,"dst":1,"p":0.4,"u":1.0}]})").network;
  CHECK(certainty_equivalent(promoted).all_edges()[0].p == 0.4);
}
