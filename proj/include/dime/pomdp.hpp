#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dime/network.hpp"
#include "dime/rng.hpp"

namespace dime {

/// W: which nodes are influenced. Bits only ever get set.
class InfluenceState {
 public:
  InfluenceState() = default;
  explicit InfluenceState(std::size_t n) : bits_(n, 0) {}

  std::size_t size() const { return bits_.size(); }
  std::size_t count() const { return count_; }
  bool test(NodeId v) const { return bits_[v] != 0; }

  /// Returns true when v was not yet influenced.
  bool set(NodeId v) {
    if (bits_[v]) return false;
    bits_[v] = 1;
    ++count_;
    return true;
  }

  void clear() {
    std::fill(bits_.begin(), bits_.end(), 0);
    count_ = 0;
  }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Bitwise this ⊇ other.
  bool contains(const InfluenceState& other) const;

  bool operator==(const InfluenceState& other) const { return bits_ == other.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

/// A K-node intervention: sorted, duplicate-free node ids.
class ActionSet {
 public:
  ActionSet() = default;
  /// Sorts; throws ValidationError on duplicates.
  explicit ActionSet(std::vector<NodeId> nodes);
  ActionSet(std::initializer_list<NodeId> nodes) : ActionSet(std::vector<NodeId>(nodes)) {}

  std::span<const NodeId> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  bool contains(NodeId v) const;
  NodeId operator[](std::size_t i) const { return nodes_[i]; }

  /// Throws ValidationError if any id >= n.
  void check_bounds(std::size_t n) const;

  std::string to_string() const;

  auto operator<=>(const ActionSet&) const = default;
  bool operator==(const ActionSet&) const = default;

 private:
  std::vector<NodeId> nodes_;
};

struct PomdpState {
  InfluenceState w;
  EdgeMask f;  // over E_u of the network the state was created on
};

/// F-values of Θ(a), sorted by uncertain edge index.
struct ObservationValue {
  std::vector<EdgeObservation> observed;

  bool operator==(const ObservationValue&) const = default;
};

struct RoundRecord {
  std::optional<ActionSet> recommended;
  ActionSet executed;
  /// Indices refer to the uncertain-edge space before this round.
  std::vector<EdgeObservation> observations;
  /// Pre-round uncertain index -> post-round index; nullopt once resolved.
  std::vector<std::optional<std::size_t>> index_map;

  bool deviated() const { return recommended && *recommended != executed; }
  bool operator==(const RoundRecord&) const = default;
};

struct SessionHistory {
  UncertainNetwork base_network;
  std::vector<RoundRecord> rounds;
};

/// Θ(a): uncertain edges whose source is in the action, ascending.
std::vector<std::size_t> observation_edges(const ActionSet& action, const UncertainNetwork& net);

/// ||next|| - ||prev||. Throws StateError unless next.W ⊇ prev.W.
long reward(const PomdpState& prev, const PomdpState& next);

/// W = 0; F_i ~ Bernoulli(u(e_i)) independently.
PomdpState sample_initial_state(const UncertainNetwork& net, Rng& rng);

/// Nodes chosen in any executed round.
std::vector<NodeId> executed_nodes(const SessionHistory& history);

}  // namespace dime
