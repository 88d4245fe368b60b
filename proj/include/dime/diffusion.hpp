#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dime/network.hpp"
#include "dime/pomdp.hpp"
#include "dime/rng.hpp"

namespace dime {

// Retry-variant independent cascade. In each time step every present edge
// (x,y) with x influenced and y not influenced at the start of the step flips
// an independent coin with probability p(e); y becomes influenced if any of its
// coins succeeds. Updates are synchronous against the step-start state and
// influenced nodes stay influenced. Coins are flipped in ascending source id,
// then CSR arc order.
//
// `present` is an EdgeMask over the network's uncertain edges (1 = exists).

void diffuse_one_step_in_place(const UncertainNetwork& net, const EdgeMask& present,
                               InfluenceState& w, Rng& rng);
void diffuse_steps_in_place(const UncertainNetwork& net, const EdgeMask& present,
                            InfluenceState& w, std::size_t steps, Rng& rng);

InfluenceState diffuse_one_step(const InstantiatedNetwork& inst, InfluenceState w, Rng& rng);
InfluenceState diffuse_L_steps(const InstantiatedNetwork& inst, InfluenceState w, std::size_t L,
                               Rng& rng);

struct GenerativeSample {
  PomdpState next_state;
  ObservationValue observation;
  long reward = 0;
};

/// Λ(s, a): seed the action, reveal F on Θ(a), then diffuse L steps over the
/// edges present in state.f. Throws ValidationError if |action| != k.
GenerativeSample generative_step(const UncertainNetwork& net, const PomdpState& state,
                                 const ActionSet& action, std::size_t k, std::size_t L, Rng& rng);

/// One episode with fixed per-round actions: F drawn from u(e), W = 0, then
/// seed + L steps per round. Returns the final influenced count.
std::size_t simulate_fixed_actions(const UncertainNetwork& net, std::span<const ActionSet> actions,
                                   std::size_t L, Rng& rng);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Samples are split into fixed-size batches; batch b draws from
/// Rng(derive_seed(seed, b)) and batch sums are reduced in batch order, so the
/// serial and OpenMP variants return bit-identical results.
inline constexpr std::size_t kMonteCarloBatch = 256;

MonteCarloEstimate estimate_influence_serial(const UncertainNetwork& net,
                                             std::span<const ActionSet> actions, std::size_t L,
                                             std::size_t samples, std::uint64_t seed);
MonteCarloEstimate estimate_influence_parallel(const UncertainNetwork& net,
                                               std::span<const ActionSet> actions, std::size_t L,
                                               std::size_t samples, std::uint64_t seed);

/// Exact expectation of the final influenced count for fixed per-round actions,
/// by enumerating every edge-existence outcome and every coin outcome.
/// Limits: N <= 64, |E_u| <= 12, at most 24 stochastic edge coins in any one
/// expansion step; otherwise CapacityError. actions.size() must equal T.
double exact_expected_influence(const UncertainNetwork& net, std::span<const ActionSet> actions,
                                std::size_t T, std::size_t L);

namespace exact {

inline constexpr std::size_t kMaxNodes = 64;
inline constexpr std::size_t kMaxUncertain = 12;
inline constexpr std::size_t kMaxCoinEvents = 24;

/// Distribution over influence bitmasks (bit v = node v influenced).
using Distribution = std::unordered_map<std::uint64_t, double>;

void check_capacity(const UncertainNetwork& net);

std::uint64_t action_mask(const ActionSet& action);

/// Exact distribution after `steps` diffusion steps from a single state.
Distribution diffuse(const UncertainNetwork& net, const EdgeMask& present, std::uint64_t w,
                     std::size_t steps);

/// Same, applied to every state of `start` (probabilities multiplied).
Distribution diffuse(const UncertainNetwork& net, const EdgeMask& present,
                     const Distribution& start, std::size_t steps);

/// Mask for the i-th enumeration of edge outcomes plus its probability.
EdgeMask mask_from_index(std::size_t m_u, std::uint64_t index);
double mask_probability(const UncertainNetwork& net, const EdgeMask& mask);

}  // namespace exact

}  // namespace dime
