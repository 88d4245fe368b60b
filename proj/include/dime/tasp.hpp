#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dime/network.hpp"
#include "dime/pomdp.hpp"
#include "dime/rng.hpp"

namespace dime {

enum class Aggregation { sample_mean, probability_weighted };
enum class RolloutPolicy { uniform_random };
enum class Execution { serial, parallel };

std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& s);  // "mean" | "weighted"

struct TaspConfig {
  std::size_t delta_count = 20;  // determinizations per solve
  std::size_t nsim = 1024;       // simulations per determinization
  double exploration_c = 1.414;
  RolloutPolicy rollout = RolloutPolicy::uniform_random;
  Aggregation aggregation = Aggregation::sample_mean;
  Execution execution = Execution::parallel;
  /// Wall-clock cap per evaluate() call; 0 disables. When it triggers, results
  /// depend on machine speed.
  double time_budget_ms = 0.0;

  /// Throws ValidationError unless delta_count >= 1, nsim >= 1, c > 0.
  void validate() const;
};

/// What the planner knows about earlier rounds: the executed actions, in the
/// id space of the network being planned on. Start states for simulations are
/// drawn by replaying these actions (seed, then L diffusion steps each).
struct HistoryContext {
  std::vector<ActionSet> executed_rounds;
};

struct ActionValue {
  ActionSet action;
  double value = 0.0;
  std::size_t visits = 0;
};

/// Leaf estimates of one determinization, sorted by action. Unvisited leaves
/// are absent.
using AlphaList = std::vector<ActionValue>;

/// Depth-K search tree over K-subsets of `candidates`. Children of a node are
/// restricted to candidates after the last one on its path, so every K-subset
/// has exactly one leaf. Nodes are created lazily.
class KLevelTree {
 public:
  static constexpr std::uint32_t kNoChild = 0;  // index 0 is the root, never a child
  static constexpr std::uint32_t kRootPos = UINT32_MAX;

  struct Node {
    std::uint32_t parent = 0;
    std::uint32_t candidate_pos = kRootPos;
    std::uint32_t depth = 0;
    std::uint32_t visits = 0;
    double mean = 0.0;  // R_v
    std::vector<std::uint32_t> children;  // by slot; empty until first expanded
  };

  /// `candidates` must be sorted and unique; depth <= candidates.size().
  KLevelTree(std::vector<NodeId> candidates, std::size_t depth);

  std::size_t depth() const { return depth_; }
  const std::vector<NodeId>& candidates() const { return candidates_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  Node& node(std::uint32_t i) { return nodes_[i]; }

  std::size_t first_child_pos(std::uint32_t i) const;
  std::size_t child_slots(std::uint32_t i) const;
  std::uint32_t child(std::uint32_t i, std::size_t slot) const;
  std::uint32_t ensure_child(std::uint32_t i, std::size_t slot);

  ActionSet action_of(std::uint32_t leaf) const;
  /// Root-to-leaf node indices for an action; throws StateError if any node is missing.
  std::vector<std::uint32_t> path_of(const ActionSet& action) const;
  AlphaList leaf_values() const;

 private:
  std::vector<NodeId> candidates_;
  std::size_t depth_;
  std::vector<Node> nodes_;
};

struct FindResult {
  ActionSet action;
  std::vector<std::uint32_t> path;
};

/// Root-to-leaf descent. At each node an unvisited child is taken first (lowest
/// id); otherwise the child maximizing R/scale + c*sqrt(ln n_parent / n_child),
/// ties to the lowest id.
FindResult find_step(KLevelTree& tree, double c, double reward_scale);

/// n_v += 1; R_v += (reward - R_v) / n_v for the leaf and all its ancestors.
void update_step(KLevelTree& tree, double reward, const ActionSet& action);

/// Long-term reward of `action` with T_remaining rounds left: replay the
/// history to get a start state, apply `action`, then T_remaining-1 rollout
/// actions, each a uniform K-subset of nodes not chosen so far (any nodes once
/// fewer than K remain); returns the sum of per-round rewards.
double simulate_step(const UncertainNetwork& net, const EdgeMask& present, const ActionSet& action,
                     std::size_t k, std::size_t T_remaining, std::size_t L,
                     const HistoryContext& history, Rng& rng);

/// nsim Find/Simulate/Update iterations on a fresh tree over `candidates`.
AlphaList evaluate(const InstantiatedNetwork& inst, std::size_t k, std::size_t T_remaining,
                   std::size_t L, const HistoryContext& history,
                   const std::vector<NodeId>& candidates, const TaspConfig& config,
                   std::uint64_t seed);

struct WeightedAlpha {
  AlphaList alpha;
  double log_probability = 0.0;
};

/// Per-action expected reward across determinizations; sorted by action.
/// sample_mean: plain mean over the lists that estimate the action.
/// probability_weighted: sum of P(δ)·α, P normalized over those same lists.
/// Throws ValidationError if every list is empty.
std::vector<ActionValue> aggregate(std::span<const WeightedAlpha> alphas, Aggregation mode);

struct TaspResult {
  ActionSet action;
  double expected_reward = 0.0;
  std::vector<ActionValue> ranking;  // aggregated values, sorted by action
};

/// Δ determinizations evaluated independently (OpenMP when execution is
/// parallel; same result either way), aggregated, argmax returned with ties
/// broken towards the lexicographically smallest action. Nodes already in the
/// history are excluded from the action space while at least K others remain.
/// Throws CapacityError if k > N.
TaspResult tasp_solve(const UncertainNetwork& net, std::size_t k, std::size_t T_remaining,
                      std::size_t L, const HistoryContext& history, const TaspConfig& config,
                      std::uint64_t seed);

}  // namespace dime
