#include "dime/heal.hpp"

#include <algorithm>
#include <limits>

#include <omp.h>

#include "dime/errors.hpp"

namespace dime {

std::string to_string(PlannerMode mode) { return mode == PlannerMode::heal ? "heal" : "heal_t"; }

PlannerMode parse_planner_mode(const std::string& s) {
  if (s == "heal") return PlannerMode::heal;
  if (s == "heal_t" || s == "heal-t") return PlannerMode::heal_t;
  throw ValidationError("unknown planner mode '" + s + "'");
}

namespace {

void validate_params(const SessionParams& params, std::size_t n) {
  if (params.K == 0 || params.T == 0) throw ValidationError("K and T must be at least 1");
  if (params.K > n) {
    throw CapacityError("K=" + std::to_string(params.K) + " exceeds the " + std::to_string(n) +
                        " nodes of the network");
  }
  if (params.mode == PlannerMode::heal_t && params.T > n) {
    throw CapacityError("HEAL-T needs at least T=" + std::to_string(params.T) + " nodes");
  }
}

}  // namespace

PlanSession PlanSession::start(UncertainNetwork net, const SessionParams& params,
                               const TaspConfig& config, std::uint64_t seed,
                               const PartitionOptions& partition_options) {
  validate_params(params, net.node_count());
  config.validate();
  PlanSession s;
  s.params_ = params;
  s.config_ = config;
  s.seed_ = seed;
  const std::size_t parts = params.mode == PlannerMode::heal ? params.K : params.T;
  s.partitioning_ = partition(net, parts, partition_options, derive_seed(seed, 0x9a27));
  s.history_.base_network = net;
  s.network_ = std::move(net);
  return s;
}

PlanSession PlanSession::restore(UncertainNetwork base, const SessionParams& params,
                                 const TaspConfig& config, std::uint64_t seed,
                                 Partitioning partitioning, std::vector<RoundRecord> rounds,
                                 std::optional<Recommendation> cached) {
  validate_params(params, base.node_count());
  config.validate();
  const std::size_t parts = params.mode == PlannerMode::heal ? params.K : params.T;
  if (partitioning.assignment.size() != base.node_count() || partitioning.k != parts) {
    throw ValidationError("stored partition does not match the network and parameters");
  }
  for (std::size_t p : partitioning.assignment) {
    if (p >= parts) throw ValidationError("stored partition assigns a node outside [0,k)");
  }
  if (rounds.size() > params.T) throw ValidationError("history longer than the horizon");

  PlanSession s;
  s.params_ = params;
  s.config_ = config;
  s.seed_ = seed;
  s.partitioning_ = std::move(partitioning);
  s.history_.base_network = base;
  s.network_ = std::move(base);
  for (RoundRecord& r : rounds) {
    if (r.executed.size() != params.K) throw ValidationError("stored round has the wrong action size");
    r.executed.check_bounds(s.network_.node_count());
    ObservationUpdate update = apply_observations(s.network_, r.observations);
    if (update.index_map != r.index_map) throw ValidationError("stored index map is inconsistent");
    s.network_ = std::move(update.network);
    s.history_.rounds.push_back(std::move(r));
  }
  s.round_ = s.history_.rounds.size() + 1;
  if (cached && cached->round != s.round_) throw ValidationError("stored recommendation is stale");
  s.cached_ = std::move(cached);
  return s;
}

HistoryContext PlanSession::context_for(const Subnetwork& sub) const {
  HistoryContext ctx;
  for (const RoundRecord& r : history_.rounds) {
    std::vector<NodeId> local;
    for (NodeId g : r.executed.nodes()) {
      const auto it = std::lower_bound(sub.to_global.begin(), sub.to_global.end(), g);
      if (it != sub.to_global.end() && *it == g) {
        local.push_back(static_cast<NodeId>(it - sub.to_global.begin()));
      }
    }
    ctx.executed_rounds.emplace_back(std::move(local));
  }
  return ctx;
}

PartitionPick PlanSession::plan_heal_part(std::size_t part) const {
  const Subnetwork sub = induced_subnetwork(network_, partitioning_, part);
  const HistoryContext ctx = context_for(sub);
  PartitionPick pick;
  pick.partition = part;

  // A part whose nodes were all chosen before: fall back to the node chosen
  // longest ago.
  std::vector<std::size_t> last_round(sub.to_global.size(), std::numeric_limits<std::size_t>::max());
  std::size_t chosen = 0;
  for (std::size_t r = 0; r < ctx.executed_rounds.size(); ++r) {
    for (NodeId v : ctx.executed_rounds[r].nodes()) {
      if (last_round[v] == std::numeric_limits<std::size_t>::max()) ++chosen;
      last_round[v] = r;
    }
  }
  if (chosen == sub.to_global.size()) {
    const auto it = std::min_element(last_round.begin(), last_round.end());
    pick.nodes.push_back(sub.to_global[static_cast<std::size_t>(it - last_round.begin())]);
    return pick;
  }

  const std::size_t t_remaining = params_.T - round_ + 1;
  const TaspResult res = tasp_solve(sub.network, 1, t_remaining, params_.L, ctx, config_,
                                    derive_seed(seed_, round_, part));
  for (NodeId v : res.action.nodes()) pick.nodes.push_back(sub.to_global[v]);
  pick.expected_reward = res.expected_reward;
  return pick;
}

const Recommendation& PlanSession::recommend() {
  if (exhausted()) throw StateError("session exhausted: all " + std::to_string(params_.T) + " rounds recorded");
  if (cached_) return *cached_;

  Recommendation rec;
  rec.round = round_;
  if (params_.mode == PlannerMode::heal) {
    rec.provenance.resize(params_.K);
    if (config_.execution == Execution::parallel) {
      std::vector<std::exception_ptr> errors(params_.K);
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(params_.K); ++p) {
        try {
          rec.provenance[static_cast<std::size_t>(p)] = plan_heal_part(static_cast<std::size_t>(p));
        } catch (...) {
          errors[static_cast<std::size_t>(p)] = std::current_exception();
        }
      }
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (std::size_t p = 0; p < params_.K; ++p) rec.provenance[p] = plan_heal_part(p);
    }
  } else {
    const std::size_t part = round_ - 1;
    const Subnetwork sub = induced_subnetwork(network_, partitioning_, part);
    if (sub.to_global.size() < params_.K) {
      throw CapacityError("HEAL-T part " + std::to_string(part) + " has " +
                          std::to_string(sub.to_global.size()) + " nodes, fewer than K=" +
                          std::to_string(params_.K));
    }
    const TaspResult res = tasp_solve(sub.network, params_.K, params_.T - round_ + 1, params_.L,
                                      context_for(sub), config_, derive_seed(seed_, round_, part));
    PartitionPick pick;
    pick.partition = part;
    for (NodeId v : res.action.nodes()) pick.nodes.push_back(sub.to_global[v]);
    pick.expected_reward = res.expected_reward;
    rec.provenance.push_back(std::move(pick));
  }

  std::vector<NodeId> nodes;
  for (const PartitionPick& pick : rec.provenance) {
    nodes.insert(nodes.end(), pick.nodes.begin(), pick.nodes.end());
    rec.expected_reward += pick.expected_reward;
  }
  rec.action = ActionSet(std::move(nodes));
  cached_ = std::move(rec);
  return *cached_;
}

ExecutionReport PlanSession::record_execution(const ActionSet& executed,
                                              std::span<const EdgeObservation> observations) {
  if (exhausted()) throw StateError("session exhausted: all " + std::to_string(params_.T) + " rounds recorded");
  if (executed.size() != params_.K) {
    throw ValidationError("executed action has " + std::to_string(executed.size()) +
                          " nodes, expected K=" + std::to_string(params_.K));
  }
  executed.check_bounds(network_.node_count());

  std::vector<EdgeObservation> sorted(observations.begin(), observations.end());
  std::sort(sorted.begin(), sorted.end(), [](const EdgeObservation& a, const EdgeObservation& b) {
    return a.uncertain_edge_index < b.uncertain_edge_index;
  });
  ObservationUpdate update = apply_observations(network_, sorted);

  ExecutionReport report;
  report.round = round_;
  const std::vector<std::size_t> expected = observation_edges(executed, network_);
  for (const EdgeObservation& o : sorted) {
    if (!std::binary_search(expected.begin(), expected.end(), o.uncertain_edge_index)) {
      ++report.unexpected_observations;
    }
  }

  RoundRecord record;
  if (cached_) record.recommended = cached_->action;
  record.executed = executed;
  record.observations = std::move(sorted);
  record.index_map = std::move(update.index_map);
  report.deviated = record.deviated();
  history_.rounds.push_back(std::move(record));

  network_ = std::move(update.network);
  report.uncertain_edges_remaining = network_.uncertain_count();
  ++round_;
  cached_.reset();
  return report;
}

EpisodeResult run_policy(const UncertainNetwork& net, const SessionParams& params,
                         const TaspConfig& config, std::uint64_t seed,
                         const std::optional<GroundTruth>& ground_truth,
                         const EpisodeOptions& options) {
  HealStrategy strategy(PlanSession::start(net, params, config, derive_seed(seed, 0)));
  if (ground_truth) {
    return run_episode(strategy, *ground_truth, params.K, params.T, params.L, options, derive_seed(seed, 2));
  }
  Rng rng(derive_seed(seed, 1));
  const GroundTruth truth = GroundTruth::sample(net, rng);
  return run_episode(strategy, truth, params.K, params.T, params.L, options, derive_seed(seed, 2));
}

}  // namespace dime
