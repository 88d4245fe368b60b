#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dime/episode.hpp"
#include "dime/network.hpp"
#include "dime/partitioner.hpp"
#include "dime/pomdp.hpp"
#include "dime/tasp.hpp"

namespace dime {

enum class PlannerMode { heal, heal_t };

std::string to_string(PlannerMode mode);
PlannerMode parse_planner_mode(const std::string& s);  // "heal" | "heal_t"

struct SessionParams {
  std::size_t K = 1;
  std::size_t T = 1;
  std::size_t L = 1;
  PlannerMode mode = PlannerMode::heal;
};

struct PartitionPick {
  std::size_t partition = 0;
  std::vector<NodeId> nodes;  // global ids
  double expected_reward = 0.0;

  bool operator==(const PartitionPick&) const = default;
};

struct Recommendation {
  std::size_t round = 0;
  ActionSet action;
  std::vector<PartitionPick> provenance;
  double expected_reward = 0.0;

  bool operator==(const Recommendation&) const = default;
};

struct ExecutionReport {
  std::size_t round = 0;                      // the round just recorded
  std::size_t uncertain_edges_remaining = 0;  // |E_u| after the update
  std::size_t unexpected_observations = 0;    // observed edges outside Θ(executed)
  bool deviated = false;
};

/// Online sense-reason-act loop over one uncertain network.
///
/// HEAL splits the network into K parts and picks one node per part each round;
/// HEAL-T splits into T parts and picks all K nodes from part t-1 in round t.
/// Parts are fixed at start; each round plans on the parts' induced
/// subnetworks of the observation-updated network. Value type: copying a
/// session snapshots it.
class PlanSession {
 public:
  /// Throws ValidationError for K/T/L of zero and CapacityError when the
  /// network has fewer nodes than parts (K for HEAL, T for HEAL-T).
  static PlanSession start(UncertainNetwork net, const SessionParams& params,
                           const TaspConfig& config, std::uint64_t seed,
                           const PartitionOptions& partition_options = {});

  /// Rebuilds a session from stored parts, replaying every round's
  /// observations on `base`. Throws ValidationError when the records disagree.
  static PlanSession restore(UncertainNetwork base, const SessionParams& params,
                             const TaspConfig& config, std::uint64_t seed, Partitioning partitioning,
                             std::vector<RoundRecord> rounds, std::optional<Recommendation> cached);

  /// Computed once per round and cached. Throws StateError once t > T and
  /// CapacityError if a HEAL-T part has fewer than K nodes.
  const Recommendation& recommend();

  /// Appends (recommended, executed, observations) to the history and applies
  /// the observations. Observation indices refer to the current network.
  ExecutionReport record_execution(const ActionSet& executed,
                                   std::span<const EdgeObservation> observations);

  std::size_t round() const { return round_; }
  bool exhausted() const { return round_ > params_.T; }
  const SessionParams& params() const { return params_; }
  const TaspConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const UncertainNetwork& network() const { return network_; }
  const SessionHistory& history() const { return history_; }
  const Partitioning& partitioning() const { return partitioning_; }
  const std::optional<Recommendation>& cached_recommendation() const { return cached_; }

  /// Executed rounds restricted to the part and translated to local ids. Every
  /// round is kept (possibly empty) so replay diffuses L steps per round.
  HistoryContext context_for(const Subnetwork& sub) const;

 private:
  PlanSession() = default;

  PartitionPick plan_heal_part(std::size_t part) const;

  SessionParams params_;
  TaspConfig config_;
  std::uint64_t seed_ = 0;
  UncertainNetwork network_;
  Partitioning partitioning_;
  SessionHistory history_;
  std::size_t round_ = 1;
  std::optional<Recommendation> cached_;
};

class HealStrategy : public Strategy {
 public:
  explicit HealStrategy(PlanSession session) : session_(std::move(session)) {}

  std::string id() const override { return to_string(session_.params().mode); }
  ActionSet recommend() override { return session_.recommend().action; }
  void record_execution(const ActionSet& executed,
                        std::span<const EdgeObservation> observations) override {
    session_.record_execution(executed, observations);
  }
  const UncertainNetwork& network() const override { return session_.network(); }
  const PlanSession& session() const { return session_; }

 private:
  PlanSession session_;
};

/// One closed-loop episode of HEAL or HEAL-T. Without a ground truth, one is
/// sampled from u(e) of `net`.
EpisodeResult run_policy(const UncertainNetwork& net, const SessionParams& params,
                         const TaspConfig& config, std::uint64_t seed,
                         const std::optional<GroundTruth>& ground_truth = std::nullopt,
                         const EpisodeOptions& options = {});

}  // namespace dime
