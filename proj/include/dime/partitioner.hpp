#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dime/network.hpp"

namespace dime {

struct Partitioning {
  std::vector<std::size_t> assignment;  // node -> part in [0, k)
  std::size_t k = 0;
  double imbalance = 0.0;
  double cut_weight = 0.0;          // after refinement
  double initial_cut_weight = 0.0;  // greedy partition before refinement

  /// floor(ceil(N/k) * (1 + imbalance)).
  std::size_t max_part_size() const;
  std::vector<std::size_t> part_sizes() const;
  std::vector<NodeId> members(std::size_t part) const;
};

/// Weighted undirected shadow: certain edges weigh 1, uncertain edges u(e);
/// weights of (a,b) and (b,a) are summed.
struct WeightedGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
};
WeightedGraph undirected_shadow(const UncertainNetwork& net);

double cut_weight(const WeightedGraph& g, const std::vector<std::size_t>& assignment);

struct PartitionOptions {
  double imbalance = 0.1;
  std::size_t moves_per_node = 10;  // refinement budget per level = moves_per_node * N
};

/// Multilevel balanced k-way partition: heavy-edge-matching coarsening down to
/// max(2k, 20) nodes, greedy graph growing on the coarsest graph, then boundary
/// refinement with single-node moves at every level. Every part is non-empty
/// and no part exceeds max_part_size(). Throws CapacityError when k > N.
Partitioning partition(const UncertainNetwork& net, std::size_t k, const PartitionOptions& options,
                       std::uint64_t seed);

/// Uniformly random assignment with part sizes differing by at most one.
std::vector<std::size_t> random_balanced_assignment(std::size_t n, std::size_t k, Rng& rng);

struct Subnetwork {
  UncertainNetwork network;
  std::vector<NodeId> to_global;                    // local id -> global id
  std::vector<std::size_t> uncertain_to_global;     // local uncertain idx -> global idx
};

/// Nodes of `part` (ascending global id) with all edges internal to it.
Subnetwork induced_subnetwork(const UncertainNetwork& net, const Partitioning& partitioning,
                              std::size_t part);

std::string partition_to_csv(const Partitioning& partitioning);

}  // namespace dime
