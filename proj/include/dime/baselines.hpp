#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dime/episode.hpp"
#include "dime/heal.hpp"
#include "dime/network.hpp"
#include "dime/pomdp.hpp"
#include "dime/rng.hpp"
#include "dime/tasp.hpp"

namespace dime {

/// Expected final influenced count for a sequence of per-round actions (each
/// seeded, then L diffusion steps). Empty actions stand for rounds that only
/// diffuse.
using SpreadEvaluator = std::function<double(std::span<const ActionSet>)>;

SpreadEvaluator monte_carlo_spread(const UncertainNetwork& net, std::size_t L, std::size_t samples,
                                   std::uint64_t seed);
SpreadEvaluator exact_spread(const UncertainNetwork& net, std::size_t L);

inline constexpr std::size_t kGreedyMonteCarloBudget = 1000;

/// Greedy with CELF lazy re-evaluation. The objective of a K-set S is the
/// spread of (history..., S, then T_remaining-1 empty rounds). Nodes in the
/// history are skipped while at least K others remain; ties go to the lowest
/// id. Throws ValidationError if the network has uncertain edges and
/// CapacityError if K > N.
ActionSet greedy_select(const UncertainNetwork& certain_net, std::size_t K, std::size_t T_remaining,
                        std::span<const ActionSet> history,
                        const SpreadEvaluator& spread);

/// Top K by out-degree, ties to the lowest id, skipping `already_chosen`.
/// Throws CapacityError if fewer than K nodes remain.
ActionSet degree_select(const UncertainNetwork& net, std::size_t K,
                        const std::vector<NodeId>& already_chosen);

/// Uniform K-subset of the nodes not in `already_chosen` (all nodes if fewer
/// than K remain). Throws CapacityError if K > N.
ActionSet random_select(const UncertainNetwork& net, std::size_t K,
                        const std::vector<NodeId>& already_chosen, Rng& rng);

struct StrategyParams {
  std::size_t K = 1;
  std::size_t T = 1;
  std::size_t L = 1;
  TaspConfig tasp;
  std::size_t greedy_samples = kGreedyMonteCarloBudget;
};

/// id is one of heal, heal_t, greedy, degree, random. Throws ValidationError
/// for an unknown id.
std::unique_ptr<Strategy> make_strategy(const std::string& id, const UncertainNetwork& net,
                                        const StrategyParams& params, std::uint64_t seed);

const std::vector<std::string>& strategy_ids();

}  // namespace dime
