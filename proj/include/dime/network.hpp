#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dime/rng.hpp"

namespace dime {

using NodeId = std::uint32_t;

/// One byte per uncertain edge; 1 = edge exists / kept.
using EdgeMask = std::vector<std::uint8_t>;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double p = 0.0;
  std::optional<double> u;  // empty for certain edges

  bool uncertain() const { return u.has_value(); }
  bool operator==(const Edge&) const = default;
};

struct EdgeObservation {
  std::size_t uncertain_edge_index = 0;
  bool exists = false;

  bool operator==(const EdgeObservation&) const = default;
};

/// Directed graph with certain edges E_c and uncertain edges E_u.
///
/// Immutable after construction. Uncertain edges keep their insertion order;
/// uncertain index i always names the i-th uncertain edge. Out-arcs are stored
/// in CSR form sorted by (src, dst) so every traversal visits edges in the
/// same order.
class UncertainNetwork {
 public:
  struct Arc {
    NodeId dst;
    double p;
    std::int32_t uncertain_index;  // -1 for certain arcs
  };

  UncertainNetwork() = default;

  /// Throws ValidationError on self-loops, duplicate (src,dst), ids >= n_nodes,
  /// p outside [0,1] or u outside the open interval (0,1).
  UncertainNetwork(std::size_t n_nodes, std::vector<Edge> edges,
                   std::vector<std::string> labels = {});

  std::size_t node_count() const { return n_nodes_; }
  std::size_t edge_count() const { return certain_.size() + uncertain_.size(); }
  std::size_t uncertain_count() const { return uncertain_.size(); }

  std::span<const Edge> certain_edges() const { return certain_; }
  std::span<const Edge> uncertain_edges() const { return uncertain_; }
  const Edge& uncertain_edge(std::size_t i) const { return uncertain_.at(i); }

  /// Certain edges followed by uncertain edges, each in stored order.
  std::vector<Edge> all_edges() const;

  std::span<const Arc> out_arcs(NodeId v) const {
    return {arcs_.data() + offsets_[v], arcs_.data() + offsets_[v + 1]};
  }
  std::size_t out_degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::optional<std::size_t> find_uncertain(NodeId src, NodeId dst) const;
  bool has_edge(NodeId src, NodeId dst) const;

  const std::vector<std::string>& labels() const { return labels_; }

  bool operator==(const UncertainNetwork& other) const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> certain_;
  std::vector<Edge> uncertain_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Arc> arcs_;
};

/// A determinization: every uncertain edge resolved to kept or removed.
/// `base` must outlive the instantiation.
struct InstantiatedNetwork {
  const UncertainNetwork* base = nullptr;
  EdgeMask kept;
  double log_probability = 0.0;

  const UncertainNetwork& network() const { return *base; }
};

struct LoadResult {
  UncertainNetwork network;
  std::size_t promoted_to_certain = 0;  // u == 1
  std::size_t dropped_zero_u = 0;       // u == 0
};

/// Parses the network JSON document:
/// {"n_nodes": int, "nodes": [{"id": int, "label": str?}], "edges": [{"src","dst","p","u"?}]}
LoadResult load_network(std::string_view document);
UncertainNetwork load_network_file(const std::string& path);

std::string network_to_json(const UncertainNetwork& net, int indent = 2);
/// Columns src,dst,p,u; u is empty for certain edges.
std::string network_to_csv(const UncertainNetwork& net);

struct CandidateEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double u = 0.0;
  double p = 0.0;
};

/// Keeps exactly the candidates with u > tau, as uncertain edges.
std::vector<Edge> threshold_filter(std::span<const CandidateEdge> candidates, double tau);

InstantiatedNetwork sample_instantiation(const UncertainNetwork& net, Rng& rng);

/// log( prod_{kept} u(e) * prod_{removed} (1 - u(e)) ).
double instantiation_log_probability(const UncertainNetwork& net, const EdgeMask& kept);

struct ObservationUpdate {
  UncertainNetwork network;
  /// old uncertain index -> new uncertain index, nullopt when resolved.
  std::vector<std::optional<std::size_t>> index_map;
};

/// Observed-existing uncertain edges become certain (p unchanged); observed-absent
/// ones are deleted. Throws ValidationError on duplicate or out-of-range indices.
ObservationUpdate apply_observations(const UncertainNetwork& net,
                                     std::span<const EdgeObservation> observations);

/// Watts-Strogatz small world. Every node links to floor(k/2) ring neighbours on
/// each side; for odd k each node additionally links to the node diametrically
/// opposite (i <-> i + floor(n/2) for i < floor(n/2)). Each lattice tie is
/// rewired with probability beta. Undirected ties are emitted as two directed
/// certain edges with p = 1.
UncertainNetwork generate_watts_strogatz(std::size_t n, std::size_t k, double beta, Rng& rng);

/// Sets p(e) = p on every edge and turns round(uncertain_fraction * M) randomly
/// chosen edges uncertain with u(e) = u. Edge order is preserved.
UncertainNetwork decorate_uniform(const UncertainNetwork& net, double p, double u,
                                  double uncertain_fraction, Rng& rng);

/// Replaces every uncertain edge with a certain edge of probability p * u.
UncertainNetwork certainty_equivalent(const UncertainNetwork& net);

bool is_weakly_connected(const UncertainNetwork& net);

}  // namespace dime
