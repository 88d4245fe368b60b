#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>

#include "dime/baselines.hpp"
#include "dime/diffusion.hpp"
#include "dime/errors.hpp"
#include "helpers.hpp"

using namespace dime;

namespace {

UncertainNetwork two_stars() {
  std::vector<Edge> e;
  for (NodeId l : {1u, 2u, 3u}) e.push_back({0, l, 1.0, {}});
  for (NodeId l : {5u, 6u, 7u}) e.push_back({4, l, 1.0, {}});
  return UncertainNetwork(8, e);
}

UncertainNetwork random_certain(Rng& rng, std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = 0; b < n; ++b)
      if (a != b && rng.uniform() < 0.35) edges.push_back({a, b, 0.2 + 0.7 * rng.uniform(), {}});
  return UncertainNetwork(n, edges);
}

double best_k_set(const UncertainNetwork& net, std::size_t K, std::size_t L, ActionSet* arg = nullptr) {
  const std::size_t n = net.node_count();
  double best = -1.0;
  for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
    if (std::size_t(std::popcount(m)) != K) continue;
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < n; ++v) if (m >> v & 1) nodes.push_back(v);
    const double x = exact_expected_influence(net, std::vector<ActionSet>{ActionSet(nodes)}, 1, L);
    if (x > best + 1e-12) {
      best = x;
      if (arg) *arg = ActionSet(nodes);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("greedy on stars") {
  std::vector<Edge> e;
  for (NodeId l = 1; l < 6; ++l) e.push_back({0, l, 1.0, {}});
  const UncertainNetwork star(6, e);
  CHECK(greedy_select(star, 1, 1, {}, exact_spread(star, 1)) == ActionSet{0});
  const auto stars = two_stars();
  CHECK(greedy_select(stars, 2, 1, {}, exact_spread(stars, 1)) == ActionSet{0, 4});
  ActionSet best;
  best_k_set(stars, 2, 1, &best);
  CHECK(best == ActionSet{0, 4});
  CHECK(greedy_select(stars, 2, 1, {}, monte_carlo_spread(stars, 1, 1000, 3)) == ActionSet{0, 4});
}

TEST_CASE("greedy with p = 0 takes the lowest ids") {
  const auto net = testing::path_network(5, 0.0);
  CHECK(greedy_select(net, 2, 1, {}, exact_spread(net, 1)) == ActionSet{0, 1});
}

TEST_CASE("greedy errors and history") {
  const auto stars = two_stars();
  CHECK_THROWS_AS(greedy_select(stars, 9, 1, {}, exact_spread(stars, 1)), CapacityError);
  const UncertainNetwork unc(2, {{0, 1, 0.5, 0.5}});
  CHECK_THROWS_AS(greedy_select(unc, 1, 1, {}, exact_spread(unc, 1)), ValidationError);
  const std::vector<ActionSet> hist{ActionSet{0}};
  CHECK(greedy_select(stars, 1, 1, hist, exact_spread(stars, 1)) == ActionSet{4});
}

TEST_CASE("greedy with exact spread: K=1 optimal, K=2 within the greedy bound") {
  Rng rng(31);
  for (int i = 0; i < 40; ++i) {
    const auto net = random_certain(rng, 4 + i % 3);
    for (std::size_t L : {1u, 2u}) {
      ActionSet best1;
      const double opt1 = best_k_set(net, 1, L, &best1);
      const auto g1 = greedy_select(net, 1, 1, {}, exact_spread(net, L));
      CHECK(g1 == best1);
      const auto g2 = greedy_select(net, 2, 1, {}, exact_spread(net, L));
      const double v2 = exact_expected_influence(net, std::vector<ActionSet>{g2}, 1, L);
      CHECK(v2 >= (1.0 - 1.0 / std::exp(1.0)) * best_k_set(net, 2, L) - 1e-9);
    }
  }
}

TEST_CASE("degree_select") {
  std::vector<Edge> e;
  for (NodeId l = 1; l < 6; ++l) e.push_back({3, NodeId((3 + l) % 6), 1.0, {}});
  const UncertainNetwork star(6, e);
  CHECK(degree_select(star, 1, {}) == ActionSet{3});
  CHECK(degree_select(star, 1, {3}) == ActionSet{0});
  Rng rng(1);
  const auto ring = generate_watts_strogatz(12, 4, 0.0, rng);
  CHECK(degree_select(ring, 3, {}) == ActionSet{0, 1, 2});
  CHECK_THROWS_AS(degree_select(ring, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), CapacityError);
}

TEST_CASE("random_select is uniform") {
  const UncertainNetwork five(5, {});
  Rng rng(7);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 10000; ++i) ++counts[random_select(five, 1, {}, rng)[0]];
  for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.2) <= 0.02);
  for (int i = 0; i < 50; ++i) CHECK_FALSE(random_select(five, 2, {0, 1}, rng).contains(0));
  CHECK_THROWS_AS(random_select(five, 6, {}, rng), CapacityError);
}

TEST_CASE("strategies avoid earlier picks") {
  const auto net = testing::ws(20, 4, 0.1, 0.2, 0.6, 0.5, 4);
  for (const auto& id : strategy_ids()) {
    StrategyParams params{2, 4, 1, {}, 100};
    params.tasp.delta_count = 4;
    params.tasp.nsim = 64;
    auto s = make_strategy(id, net, params, 5);
    CHECK(s->id() == id);
    std::set<NodeId> used;
    for (int t = 0; t < 4; ++t) {
      const auto a = s->recommend();
      CHECK(a.size() == 2);
      for (auto v : a.nodes()) CHECK(used.insert(v).second);
      s->record_execution(a, {});
    }
  }
  CHECK_THROWS_AS(make_strategy("bogus", net, {}, 1), ValidationError);
}

TEST_CASE("greedy plans on the observation-updated certainty equivalent") {
  // 0 -> 1,2,3 uncertain; 4 -> 5,6 certain. Prior favours 4, observing 0's
  // edges present flips it.
  const UncertainNetwork net(7, {{0, 1, 1.0, 0.3}, {0, 2, 1.0, 0.3}, {0, 3, 1.0, 0.3},
                                 {4, 5, 1.0, {}}, {4, 6, 1.0, {}}});
  auto g = make_strategy("greedy", net, {1, 3, 1, {}, 500}, 1);
  CHECK(g->recommend() == ActionSet{4});
  g->record_execution(ActionSet{1}, {});
  CHECK(g->recommend() == ActionSet{4});
  auto h = make_strategy("greedy", net, {1, 3, 1, {}, 500}, 1);
  const std::vector<EdgeObservation> seen{{0, true}, {1, true}, {2, true}};
  h->record_execution(ActionSet{5}, seen);
  CHECK(h->recommend() == ActionSet{0});
}

TEST_CASE("monte carlo spread is deterministic") {
  const auto net = certainty_equivalent(testing::ws(30, 4, 0.1, 0.2, 0.6, 1.0, 1));
  const std::vector<ActionSet> a{ActionSet{1, 2}};
  CHECK(monte_carlo_spread(net, 1, 500, 3)(a) == monte_carlo_spread(net, 1, 500, 3)(a));
}
