#include "dime/baselines.hpp"

#include <algorithm>
#include <queue>

#include "dime/diffusion.hpp"
#include "dime/errors.hpp"

namespace dime {

SpreadEvaluator monte_carlo_spread(const UncertainNetwork& net, std::size_t L, std::size_t samples,
                                   std::uint64_t seed) {
  return [&net, L, samples, seed](std::span<const ActionSet> actions) {
    return estimate_influence_serial(net, actions, L, samples, seed).mean;
  };
}

SpreadEvaluator exact_spread(const UncertainNetwork& net, std::size_t L) {
  return [&net, L](std::span<const ActionSet> actions) {
    return exact_expected_influence(net, actions, actions.size(), L);
  };
}

namespace {

std::vector<NodeId> free_nodes(std::size_t n, std::size_t K, std::span<const NodeId> chosen,
                               bool fall_back) {
  std::vector<std::uint8_t> used(n, 0);
  for (NodeId v : chosen) {
    if (v < n) used[v] = 1;
  }
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v) {
    if (!used[v]) out.push_back(v);
  }
  if (out.size() < K && fall_back) {
    out.resize(n);
    for (NodeId v = 0; v < n; ++v) out[v] = v;
  }
  return out;
}

}  // namespace

ActionSet greedy_select(const UncertainNetwork& certain_net, std::size_t K, std::size_t T_remaining,
                        std::span<const ActionSet> history,
                        const SpreadEvaluator& spread) {
  if (certain_net.uncertain_count() != 0) {
    throw ValidationError("greedy expects a network without uncertain edges");
  }
  const std::size_t n = certain_net.node_count();
  if (K > n) throw CapacityError("K=" + std::to_string(K) + " exceeds the " + std::to_string(n) + " nodes");
  if (K == 0) return {};

  std::vector<NodeId> used;
  for (const ActionSet& a : history) used.insert(used.end(), a.nodes().begin(), a.nodes().end());
  const std::vector<NodeId> candidates = free_nodes(n, K, used, true);

  std::vector<ActionSet> plan(history.begin(), history.end());
  const std::size_t slot = plan.size();
  plan.emplace_back();
  for (std::size_t r = 1; r < std::max<std::size_t>(1, T_remaining); ++r) plan.emplace_back();

  std::vector<NodeId> selected;
  auto value_with = [&](std::optional<NodeId> extra) {
    std::vector<NodeId> s = selected;
    if (extra) s.push_back(*extra);
    plan[slot] = ActionSet(std::move(s));
    return spread(plan);
  };

  struct Entry {
    double gain;
    NodeId node;
    std::size_t stamp;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);

  double current = value_with(std::nullopt);
  for (NodeId v : candidates) queue.push({value_with(v) - current, v, 0});

  while (selected.size() < K && !queue.empty()) {
    Entry top = queue.top();
    queue.pop();
    if (top.stamp == selected.size()) {
      selected.push_back(top.node);
      current = value_with(std::nullopt);
      continue;
    }
    top.gain = value_with(top.node) - current;
    top.stamp = selected.size();
    queue.push(top);
  }
  return ActionSet(std::move(selected));
}

ActionSet degree_select(const UncertainNetwork& net, std::size_t K,
                        const std::vector<NodeId>& already_chosen) {
  std::vector<NodeId> pool = free_nodes(net.node_count(), K, already_chosen, false);
  if (pool.size() < K) {
    throw CapacityError("K=" + std::to_string(K) + " exceeds the " + std::to_string(pool.size()) +
                        " nodes not yet chosen");
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [&](NodeId a, NodeId b) { return net.out_degree(a) > net.out_degree(b); });
  pool.resize(K);
  return ActionSet(std::move(pool));
}

ActionSet random_select(const UncertainNetwork& net, std::size_t K,
                        const std::vector<NodeId>& already_chosen, Rng& rng) {
  if (K > net.node_count()) {
    throw CapacityError("K=" + std::to_string(K) + " exceeds the " + std::to_string(net.node_count()) + " nodes");
  }
  std::vector<NodeId> pool = free_nodes(net.node_count(), K, already_chosen, true);
  std::vector<NodeId> picked;
  rng.sample_subset(pool, K, picked);
  return ActionSet(std::move(picked));
}

namespace {

// Tracks the observation-updated network and the executed rounds.
class ObservingStrategy : public Strategy {
 public:
  ObservingStrategy(const UncertainNetwork& net, const StrategyParams& params, std::uint64_t seed)
      : network_(net), params_(params), seed_(seed) {
    if (params.K > net.node_count()) {
      throw CapacityError("K=" + std::to_string(params.K) + " exceeds the " +
                          std::to_string(net.node_count()) + " nodes of the network");
    }
  }

  void record_execution(const ActionSet& executed, std::span<const EdgeObservation> observations) override {
    executed.check_bounds(network_.node_count());
    network_ = apply_observations(network_, observations).network;
    history_.push_back(executed);
  }
  const UncertainNetwork& network() const override { return network_; }

 protected:
  std::vector<NodeId> chosen() const {
    std::vector<NodeId> out;
    for (const ActionSet& a : history_) out.insert(out.end(), a.nodes().begin(), a.nodes().end());
    return out;
  }
  std::size_t round() const { return history_.size() + 1; }

  UncertainNetwork network_;
  StrategyParams params_;
  std::uint64_t seed_;
  std::vector<ActionSet> history_;
};

class GreedyStrategy : public ObservingStrategy {
 public:
  using ObservingStrategy::ObservingStrategy;
  std::string id() const override { return "greedy"; }
  ActionSet recommend() override {
    const UncertainNetwork ce = certainty_equivalent(network_);
    const std::size_t t_remaining = params_.T >= round() ? params_.T - round() + 1 : 1;
    return greedy_select(ce, params_.K, t_remaining, history_,
                         monte_carlo_spread(ce, params_.L, params_.greedy_samples, derive_seed(seed_, round())));
  }
};

class DegreeStrategy : public ObservingStrategy {
 public:
  using ObservingStrategy::ObservingStrategy;
  std::string id() const override { return "degree"; }
  ActionSet recommend() override {
    const std::vector<NodeId> used = chosen();
    try {
      return degree_select(network_, params_.K, used);
    } catch (const CapacityError&) {
      return degree_select(network_, params_.K, {});
    }
  }
};

class RandomStrategy : public ObservingStrategy {
 public:
  using ObservingStrategy::ObservingStrategy;
  std::string id() const override { return "random"; }
  ActionSet recommend() override {
    Rng rng(derive_seed(seed_, round()));
    return random_select(network_, params_.K, chosen(), rng);
  }
};

}  // namespace

const std::vector<std::string>& strategy_ids() {
  static const std::vector<std::string> ids{"heal", "heal_t", "greedy", "degree", "random"};
  return ids;
}

std::unique_ptr<Strategy> make_strategy(const std::string& id, const UncertainNetwork& net,
                                        const StrategyParams& params, std::uint64_t seed) {
  if (id == "heal" || id == "heal_t") {
    const SessionParams sp{params.K, params.T, params.L, parse_planner_mode(id)};
    return std::make_unique<HealStrategy>(PlanSession::start(net, sp, params.tasp, seed));
  }
  if (id == "greedy") return std::make_unique<GreedyStrategy>(net, params, seed);
  if (id == "degree") return std::make_unique<DegreeStrategy>(net, params, seed);
  if (id == "random") return std::make_unique<RandomStrategy>(net, params, seed);
  throw ValidationError("unknown strategy '" + id + "'");
}

}  // namespace dime
