#include <doctest.h>

#include <algorithm>
#include <limits>

#include "dime/errors.hpp"
#include "dime/partitioner.hpp"
#include "helpers.hpp"

using namespace dime;

namespace {

double brute_force_min_cut(const UncertainNetwork& net, std::size_t k, std::size_t max_size) {
  const auto g = undirected_shadow(net);
  std::vector<std::size_t> a(net.node_count(), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto p : a) ++sizes[p];
    if (std::all_of(sizes.begin(), sizes.end(), [&](auto s) { return s > 0 && s <= max_size; })) {
      best = std::min(best, cut_weight(g, a));
    }
    std::size_t i = 0;
    while (i < a.size() && ++a[i] == k) a[i++] = 0;
    if (i == a.size()) break;
  }
  return best;
}

void check_balanced(const Partitioning& p, std::size_t n) {
  CHECK(p.assignment.size() == n);
  for (auto s : p.part_sizes()) {
    CHECK(s >= 1);
    CHECK(s <= p.max_part_size());
  }
}

}  // namespace

TEST_CASE("two triangles split into components") {
  const auto p = partition(testing::two_triangles(), 2, {}, 1);
  CHECK(p.cut_weight == 0.0);
  CHECK(p.assignment[0] == p.assignment[1]);
  CHECK(p.assignment[1] == p.assignment[2]);
  CHECK(p.assignment[3] == p.assignment[4]);
  CHECK(p.assignment[0] != p.assignment[3]);
}

TEST_CASE("path of four splits in the middle") {
  const auto net = testing::path_network(4);
  const auto p = partition(net, 2, {0.0, 10}, 3);
  check_balanced(p, 4);
  CHECK(p.cut_weight == brute_force_min_cut(net, 2, 2));
  CHECK(p.cut_weight == 1.0);
  CHECK(p.assignment[0] == p.assignment[1]);
  CHECK(p.assignment[2] == p.assignment[3]);
}

TEST_CASE("k = 1 and k > N") {
  const auto net = testing::fig2();
  const auto one = partition(net, 1, {}, 0);
  CHECK(one.cut_weight == 0.0);
  CHECK(one.members(0).size() == 6);
  CHECK_THROWS_AS(partition(net, 7, {}, 0), CapacityError);
  const auto six = partition(net, 6, {}, 0);
  check_balanced(six, 6);
}

TEST_CASE("shadow weights") {
  const UncertainNetwork net(3, {{0, 1, 0.5, {}}, {1, 0, 0.5, 0.4}, {1, 2, 0.5, 0.3}});
  const auto g = undirected_shadow(net);
  double w01 = 0.0;
  for (auto [v, w] : g.adj[0]) if (v == 1) w01 = w;
  CHECK(w01 == doctest::Approx(1.4));
  CHECK(cut_weight(g, {0, 0, 1}) == doctest::Approx(0.3));
  CHECK(cut_weight(g, {0, 1, 1}) == doctest::Approx(1.4));
}

TEST_CASE("small graphs reach the brute force optimum or close") {
  Rng gen(4);
  for (int i = 0; i < 20; ++i) {
    const auto net = testing::ws(10, 4, 0.3, 0.1, 0.6, 0.5, 100 + i);
    const auto p = partition(net, 2, {}, i);
    check_balanced(p, 10);
    CHECK(p.cut_weight <= p.initial_cut_weight + 1e-12);
    CHECK(p.cut_weight >= brute_force_min_cut(net, 2, p.max_part_size()) - 1e-12);
    CHECK(p.cut_weight == doctest::Approx(cut_weight(undirected_shadow(net), p.assignment)));
  }
}

TEST_CASE("balanced and better than random on WS(60,6,0.1)") {
  for (std::size_t k : {2u, 4u}) {
    double cut = 0.0, random_cut = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto net = testing::ws(60, 6, 0.1, 0.1, 0.6, 1.0, s);
      const auto p = partition(net, k, {}, s);
      check_balanced(p, 60);
      CHECK(p.cut_weight <= p.initial_cut_weight + 1e-12);
      cut += p.cut_weight;
      Rng rng(s);
      random_cut += cut_weight(undirected_shadow(net), random_balanced_assignment(60, k, rng));
    }
    CHECK(cut < random_cut);
  }
}

TEST_CASE("deterministic given seed") {
  const auto net = testing::ws(80, 6, 0.1, 0.1, 0.6, 1.0, 5);
  CHECK(partition(net, 4, {}, 17).assignment == partition(net, 4, {}, 17).assignment);
}

TEST_CASE("induced_subnetwork") {
  const auto net = testing::ws(30, 4, 0.2, 0.1, 0.6, 0.5, 8);
  const auto p = partition(net, 3, {}, 2);
  std::size_t internal = 0;
  for (std::size_t part = 0; part < 3; ++part) {
    const auto sub = induced_subnetwork(net, p, part);
    CHECK(sub.network.node_count() == p.members(part).size());
    CHECK(sub.to_global == p.members(part));
    CHECK(std::is_sorted(sub.to_global.begin(), sub.to_global.end()));
    for (std::size_t i = 0; i < sub.network.uncertain_count(); ++i) {
      const auto& le = sub.network.uncertain_edge(i);
      const auto& ge = net.uncertain_edge(sub.uncertain_to_global[i]);
      CHECK(sub.to_global[le.src] == ge.src);
      CHECK(sub.to_global[le.dst] == ge.dst);
    }
    internal += sub.network.edge_count();
  }
  std::size_t crossing = 0;
  for (const auto& e : net.all_edges()) crossing += p.assignment[e.src] != p.assignment[e.dst];
  CHECK(internal + crossing == net.edge_count());

  const auto whole = induced_subnetwork(net, partition(net, 1, {}, 0), 0);
  CHECK(whole.network == net);
  CHECK_THROWS(induced_subnetwork(net, p, 3));

  const auto tri = testing::two_triangles();
  const auto tp = partition(tri, 2, {}, 1);
  for (std::size_t part = 0; part < 2; ++part) {
    const auto sub = induced_subnetwork(tri, tp, part);
    CHECK(sub.network.node_count() == 3);
    CHECK(sub.network.edge_count() == 6);
  }
  CHECK(partition_to_csv(tp).rfind("node_id,part\n", 0) == 0);
}
