#include "dime/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "dime/errors.hpp"

namespace dime {

namespace {

constexpr double kEps = 1e-12;

struct Level {
  WeightedGraph graph;
  std::vector<std::size_t> vertex_weight;
  std::vector<std::size_t> to_coarse;  // fine node -> node of the next coarser level
};

WeightedGraph merge_adjacency(std::size_t n, const std::vector<std::map<std::size_t, double>>& rows) {
  WeightedGraph g;
  g.n = n;
  g.adj.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.adj[v].assign(rows[v].begin(), rows[v].end());
  return g;
}

// Heavy-edge matching. Returns false when the graph barely shrinks.
bool coarsen(const Level& fine, std::size_t max_vertex_weight, Rng& rng, Level& coarse,
             std::vector<std::size_t>& to_coarse) {
  const std::size_t n = fine.graph.n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));

  constexpr std::size_t kUnmatched = SIZE_MAX;
  std::vector<std::size_t> match(n, kUnmatched);
  for (std::size_t v : order) {
    if (match[v] != kUnmatched) continue;
    std::size_t best = kUnmatched;
    double best_w = -1.0;
    for (const auto& [u, w] : fine.graph.adj[v]) {
      if (match[u] != kUnmatched || u == v) continue;
      if (fine.vertex_weight[u] + fine.vertex_weight[v] > max_vertex_weight) continue;
      if (w > best_w + kEps || (std::abs(w - best_w) <= kEps && u < best)) {
        best = u;
        best_w = w;
      }
    }
    if (best == kUnmatched) {
      match[v] = v;
    } else {
      match[v] = best;
      match[best] = v;
    }
  }

  to_coarse.assign(n, kUnmatched);
  std::size_t next = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (to_coarse[v] != kUnmatched) continue;
    to_coarse[v] = next;
    to_coarse[match[v]] = next;
    ++next;
  }
  if (next * 20 > n * 19) return false;  // less than 5% reduction

  coarse.vertex_weight.assign(next, 0);
  for (std::size_t v = 0; v < n; ++v) coarse.vertex_weight[to_coarse[v]] += fine.vertex_weight[v];
  std::vector<std::map<std::size_t, double>> rows(next);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [u, w] : fine.graph.adj[v]) {
      const std::size_t cv = to_coarse[v];
      const std::size_t cu = to_coarse[u];
      if (cv != cu) rows[cv][cu] += w;
    }
  }
  coarse.graph = merge_adjacency(next, rows);
  return true;
}

std::vector<double> part_weights(const std::vector<std::size_t>& assignment,
                                 const std::vector<std::size_t>& vw, std::size_t k) {
  std::vector<double> w(k, 0.0);
  for (std::size_t v = 0; v < assignment.size(); ++v) w[assignment[v]] += static_cast<double>(vw[v]);
  return w;
}

std::vector<std::size_t> grow_partition(const WeightedGraph& g, const std::vector<std::size_t>& vw,
                                        std::size_t k, Rng& rng) {
  const std::size_t n = g.n;
  constexpr std::size_t kFree = SIZE_MAX;
  std::vector<std::size_t> a(n, kFree);
  const double total = std::accumulate(vw.begin(), vw.end(), 0.0);
  const double target = total / static_cast<double>(k);
  std::size_t remaining = n;

  for (std::size_t p = 0; p + 1 < k && remaining > 0; ++p) {
    std::vector<double> conn(n, 0.0);
    double weight = 0.0;
    auto add = [&](std::size_t v) {
      a[v] = p;
      --remaining;
      weight += static_cast<double>(vw[v]);
      for (const auto& [u, w] : g.adj[v]) conn[u] += w;
    };
    // Seed: random free node.
    {
      std::vector<std::size_t> free_nodes;
      for (std::size_t v = 0; v < n; ++v) {
        if (a[v] == kFree) free_nodes.push_back(v);
      }
      add(free_nodes[rng.below(free_nodes.size())]);
    }
    // Leave at least one node for each later part.
    while (weight < target && remaining > (k - 1 - p)) {
      std::size_t best = kFree;
      for (std::size_t v = 0; v < n; ++v) {
        if (a[v] != kFree) continue;
        if (best == kFree || conn[v] > conn[best] + kEps) best = v;
      }
      if (best == kFree) break;
      if (weight + static_cast<double>(vw[best]) > target * 1.5 && weight > 0.0) break;
      add(best);
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (a[v] == kFree) a[v] = k - 1;
  }
  return a;
}

// Greedy single-vertex moves with strictly positive gain that respect the
// weight cap and never empty a part.
void refine(const WeightedGraph& g, const std::vector<std::size_t>& vw, std::size_t k,
            double max_weight, std::size_t budget, Rng& rng, std::vector<std::size_t>& a) {
  const std::size_t n = g.n;
  std::vector<double> pw = part_weights(a, vw, k);
  std::vector<double> conn(k, 0.0);
  std::vector<std::size_t> touched;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t moves = 0;
  bool improved = true;
  while (improved && moves < budget) {
    improved = false;
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t v : order) {
      if (moves >= budget) break;
      const std::size_t own = a[v];
      touched.clear();
      for (const auto& [u, w] : g.adj[v]) {
        if (conn[a[u]] == 0.0) touched.push_back(a[u]);
        conn[a[u]] += w;
      }
      std::size_t best = own;
      double best_gain = kEps;
      const auto wv = static_cast<double>(vw[v]);
      if (pw[own] - wv > 0.0) {
        for (std::size_t q : touched) {
          if (q == own || pw[q] + wv > max_weight + kEps) continue;
          const double gain = conn[q] - conn[own];
          if (gain > best_gain + kEps || (std::abs(gain - best_gain) <= kEps && q < best && best != own)) {
            best = q;
            best_gain = gain;
          }
        }
      }
      for (std::size_t q : touched) conn[q] = 0.0;
      if (best != own) {
        a[v] = best;
        pw[own] -= wv;
        pw[best] += wv;
        ++moves;
        improved = true;
      }
    }
  }
}

// Unit vertex weights only: move best-gain vertices out of overfull parts and
// into empty parts until the partition is valid.
void repair_balance(const WeightedGraph& g, std::size_t k, std::size_t max_size,
                    std::vector<std::size_t>& a) {
  const std::size_t n = g.n;
  std::vector<std::size_t> size(k, 0);
  for (std::size_t v = 0; v < n; ++v) ++size[a[v]];
  std::vector<double> conn(k, 0.0);
  for (;;) {
    std::size_t src = k;
    std::size_t forced_dst = k;
    for (std::size_t p = 0; p < k; ++p) {
      if (size[p] > max_size && (src == k || size[p] > size[src])) src = p;
    }
    if (src == k) {
      for (std::size_t p = 0; p < k; ++p) {
        if (size[p] == 0) {
          forced_dst = p;
          break;
        }
      }
      if (forced_dst == k || n < k) return;
      src = static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
    }
    std::size_t best_v = n;
    std::size_t best_q = k;
    double best_gain = -1e300;
    for (std::size_t v = 0; v < n; ++v) {
      if (a[v] != src) continue;
      std::fill(conn.begin(), conn.end(), 0.0);
      for (const auto& [u, w] : g.adj[v]) conn[a[u]] += w;
      for (std::size_t q = 0; q < k; ++q) {
        if (q == src || size[q] + 1 > max_size) continue;
        if (forced_dst != k && q != forced_dst) continue;
        const double gain = conn[q] - conn[src];
        if (gain > best_gain + kEps) {
          best_gain = gain;
          best_v = v;
          best_q = q;
        }
      }
    }
    if (best_v == n) return;
    a[best_v] = best_q;
    --size[src];
    ++size[best_q];
  }
}

}  // namespace

std::size_t Partitioning::max_part_size() const {
  if (k == 0) return 0;
  const std::size_t n = assignment.size();
  const std::size_t base = (n + k - 1) / k;
  return static_cast<std::size_t>(std::floor(static_cast<double>(base) * (1.0 + imbalance) + 1e-9));
}

std::vector<std::size_t> Partitioning::part_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t p : assignment) ++sizes[p];
  return sizes;
}

std::vector<NodeId> Partitioning::members(std::size_t part) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    if (assignment[v] == part) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

WeightedGraph undirected_shadow(const UncertainNetwork& net) {
  std::vector<std::map<std::size_t, double>> rows(net.node_count());
  for (const Edge& e : net.all_edges()) {
    const double w = e.u ? *e.u : 1.0;
    rows[e.src][e.dst] += w;
    rows[e.dst][e.src] += w;
  }
  return merge_adjacency(net.node_count(), rows);
}

double cut_weight(const WeightedGraph& g, const std::vector<std::size_t>& assignment) {
  double cut = 0.0;
  for (std::size_t v = 0; v < g.n; ++v) {
    for (const auto& [u, w] : g.adj[v]) {
      if (v < u && assignment[v] != assignment[u]) cut += w;
    }
  }
  return cut;
}

Partitioning partition(const UncertainNetwork& net, std::size_t k, const PartitionOptions& options,
                       std::uint64_t seed) {
  const std::size_t n = net.node_count();
  if (k == 0) throw ValidationError("partition count must be at least 1");
  if (k > n) {
    throw CapacityError("cannot split " + std::to_string(n) + " nodes into " + std::to_string(k) +
                        " non-empty parts");
  }
  if (!(options.imbalance >= 0.0)) throw ValidationError("imbalance must be non-negative");

  Partitioning result;
  result.k = k;
  result.imbalance = options.imbalance;
  result.assignment.assign(n, 0);
  const std::size_t max_size = result.max_part_size();
  const std::size_t budget = options.moves_per_node * n;
  Rng rng(seed);

  std::vector<Level> levels(1);
  levels[0].graph = undirected_shadow(net);
  levels[0].vertex_weight.assign(n, 1);
  if (k == 1) return result;

  const std::size_t coarse_target = std::max<std::size_t>(2 * k, 20);
  const std::size_t max_vertex_weight = std::max<std::size_t>(1, max_size / 2);
  while (levels.back().graph.n > coarse_target) {
    Level next;
    std::vector<std::size_t> map;
    if (!coarsen(levels.back(), max_vertex_weight, rng, next, map)) break;
    levels.back().to_coarse = std::move(map);
    levels.push_back(std::move(next));
  }

  const Level& coarsest = levels.back();
  std::vector<std::size_t> initial;
  double best_score = 1e300;
  for (int attempt = 0; attempt < 4; ++attempt) {
    auto candidate = grow_partition(coarsest.graph, coarsest.vertex_weight, k, rng);
    const auto pw = part_weights(candidate, coarsest.vertex_weight, k);
    const double overload =
        std::max(0.0, *std::max_element(pw.begin(), pw.end()) - static_cast<double>(max_size));
    const double score = overload * 1e6 + cut_weight(coarsest.graph, candidate);
    if (score < best_score) {
      best_score = score;
      initial = std::move(candidate);
    }
  }

  auto project = [&](std::size_t from_level, std::vector<std::size_t> coarse_assignment) {
    for (std::size_t l = from_level; l-- > 0;) {
      std::vector<std::size_t> fine(levels[l].graph.n);
      for (std::size_t v = 0; v < fine.size(); ++v) fine[v] = coarse_assignment[levels[l].to_coarse[v]];
      coarse_assignment = std::move(fine);
    }
    return coarse_assignment;
  };

  // Route B: project the greedy partition straight down and make it valid.
  std::vector<std::size_t> start = project(levels.size() - 1, initial);
  repair_balance(levels[0].graph, k, max_size, start);
  result.initial_cut_weight = cut_weight(levels[0].graph, start);
  std::vector<std::size_t> flat = start;
  refine(levels[0].graph, levels[0].vertex_weight, k, static_cast<double>(max_size), budget, rng, flat);

  // Route A: refine at every level while uncoarsening.
  std::vector<std::size_t> current = initial;
  for (std::size_t l = levels.size(); l-- > 0;) {
    refine(levels[l].graph, levels[l].vertex_weight, k, static_cast<double>(max_size),
           options.moves_per_node * levels[l].graph.n, rng, current);
    if (l > 0) {
      std::vector<std::size_t> fine(levels[l - 1].graph.n);
      for (std::size_t v = 0; v < fine.size(); ++v) fine[v] = current[levels[l - 1].to_coarse[v]];
      current = std::move(fine);
    }
  }
  repair_balance(levels[0].graph, k, max_size, current);
  refine(levels[0].graph, levels[0].vertex_weight, k, static_cast<double>(max_size), budget, rng, current);

  const double cut_a = cut_weight(levels[0].graph, current);
  const double cut_b = cut_weight(levels[0].graph, flat);
  result.assignment = cut_a <= cut_b ? current : flat;
  result.cut_weight = std::min(cut_a, cut_b);
  return result;
}

std::vector<std::size_t> random_balanced_assignment(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> a(n);
  for (std::size_t v = 0; v < n; ++v) a[v] = v % k;
  rng.shuffle(std::span<std::size_t>(a));
  return a;
}

Subnetwork induced_subnetwork(const UncertainNetwork& net, const Partitioning& partitioning,
                              std::size_t part) {
  if (part >= partitioning.k) throw ValidationError("partition index out of range");
  if (partitioning.assignment.size() != net.node_count()) {
    throw ValidationError("partitioning does not match network");
  }
  Subnetwork sub;
  sub.to_global = partitioning.members(part);
  std::vector<std::int64_t> to_local(net.node_count(), -1);
  for (std::size_t i = 0; i < sub.to_global.size(); ++i) {
    to_local[sub.to_global[i]] = static_cast<std::int64_t>(i);
  }
  std::vector<Edge> edges;
  for (const Edge& e : net.certain_edges()) {
    if (to_local[e.src] >= 0 && to_local[e.dst] >= 0) {
      edges.push_back({static_cast<NodeId>(to_local[e.src]), static_cast<NodeId>(to_local[e.dst]), e.p, {}});
    }
  }
  for (std::size_t i = 0; i < net.uncertain_count(); ++i) {
    const Edge& e = net.uncertain_edge(i);
    if (to_local[e.src] >= 0 && to_local[e.dst] >= 0) {
      edges.push_back({static_cast<NodeId>(to_local[e.src]), static_cast<NodeId>(to_local[e.dst]), e.p, e.u});
      sub.uncertain_to_global.push_back(i);
    }
  }
  std::vector<std::string> labels;
  if (!net.labels().empty()) {
    for (NodeId g : sub.to_global) labels.push_back(net.labels()[g]);
  }
  sub.network = UncertainNetwork(sub.to_global.size(), std::move(edges), std::move(labels));
  return sub;
}

std::string partition_to_csv(const Partitioning& partitioning) {
  std::ostringstream out;
  out << "node_id,part\n";
  for (std::size_t v = 0; v < partitioning.assignment.size(); ++v) {
    out << v << ',' << partitioning.assignment[v] << '\n';
  }
  return out.str();
}

}  // namespace dime
