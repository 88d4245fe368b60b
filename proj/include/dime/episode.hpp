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

/// Per-round chooser driven through the same loop for every strategy:
/// recommend, then record what was executed and what was observed.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string id() const = 0;
  virtual ActionSet recommend() = 0;
  virtual void record_execution(const ActionSet& executed,
                                std::span<const EdgeObservation> observations) = 0;
  /// Network the strategy currently plans on (observation indices refer to it).
  virtual const UncertainNetwork& network() const = 0;
};

/// The world an episode runs in: a network with the true propagation
/// probabilities and one resolution of its uncertain edges.
struct GroundTruth {
  UncertainNetwork network;
  EdgeMask present;

  static GroundTruth sample(const UncertainNetwork& net, Rng& rng);
  bool edge_exists(NodeId src, NodeId dst) const;
};

struct EpisodeOptions {
  std::size_t deviations = 0;  // rounds whose action is replaced by a random one
};

struct RoundLog {
  std::size_t round = 0;
  ActionSet recommended;
  ActionSet executed;
  std::vector<EdgeObservation> observations;
  std::size_t influenced = 0;  // cumulative, after the round's diffusion
};

struct EpisodeResult {
  std::size_t total_influenced = 0;
  long indirect = 0;
  std::vector<RoundLog> rounds;
};

long indirect_influence(std::size_t total_influenced, std::size_t K, std::size_t T);

/// Closed loop for T rounds: recommend, execute (or deviate), observe Θ(executed)
/// from the ground truth, seed and diffuse L steps on the ground truth.
EpisodeResult run_episode(Strategy& strategy, const GroundTruth& truth, std::size_t K,
                          std::size_t T, std::size_t L, const EpisodeOptions& options,
                          std::uint64_t seed);

/// Columns: round,recommended,executed,observed_edges,cumulative_influenced.
/// Node lists are space separated; observations are index:0|1.
std::string episode_to_csv(const EpisodeResult& result);

}  // namespace dime
