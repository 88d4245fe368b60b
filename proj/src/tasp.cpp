#include "dime/tasp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include <omp.h>

#include "dime/diffusion.hpp"
#include "dime/errors.hpp"

namespace dime {

std::string to_string(Aggregation a) {
  return a == Aggregation::sample_mean ? "mean" : "weighted";
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean" || s == "sample_mean") return Aggregation::sample_mean;
  if (s == "weighted" || s == "probability_weighted") return Aggregation::probability_weighted;
  throw ValidationError("unknown aggregation mode '" + s + "'");
}

void TaspConfig::validate() const {
  if (delta_count < 1) throw ValidationError("delta must be at least 1");
  if (nsim < 1) throw ValidationError("nsim must be at least 1");
  if (!(exploration_c > 0.0)) throw ValidationError("UCB exploration constant must be positive");
  if (time_budget_ms < 0.0) throw ValidationError("time budget must be non-negative");
}

KLevelTree::KLevelTree(std::vector<NodeId> candidates, std::size_t depth)
    : candidates_(std::move(candidates)), depth_(depth) {
  if (depth_ > candidates_.size()) throw CapacityError("tree depth exceeds candidate count");
  nodes_.emplace_back();
}

std::size_t KLevelTree::first_child_pos(std::uint32_t i) const {
  const Node& v = nodes_[i];
  return v.candidate_pos == kRootPos ? 0 : static_cast<std::size_t>(v.candidate_pos) + 1;
}

std::size_t KLevelTree::child_slots(std::uint32_t i) const {
  const Node& v = nodes_[i];
  if (v.depth >= depth_) return 0;
  // Positions j with j <= |C| - (K - depth), leaving room for the rest of the path.
  const std::size_t last = candidates_.size() - (depth_ - v.depth);
  const std::size_t first = first_child_pos(i);
  return last + 1 - first;
}

std::uint32_t KLevelTree::child(std::uint32_t i, std::size_t slot) const {
  const Node& v = nodes_[i];
  return v.children.empty() ? kNoChild : v.children[slot];
}

std::uint32_t KLevelTree::ensure_child(std::uint32_t i, std::size_t slot) {
  if (nodes_[i].children.empty()) nodes_[i].children.assign(child_slots(i), kNoChild);
  if (nodes_[i].children[slot] != kNoChild) return nodes_[i].children[slot];
  Node c;
  c.parent = i;
  c.candidate_pos = static_cast<std::uint32_t>(first_child_pos(i) + slot);
  c.depth = nodes_[i].depth + 1;
  nodes_.push_back(std::move(c));
  const auto idx = static_cast<std::uint32_t>(nodes_.size() - 1);
  nodes_[i].children[slot] = idx;
  return idx;
}

ActionSet KLevelTree::action_of(std::uint32_t leaf) const {
  std::vector<NodeId> out;
  for (std::uint32_t v = leaf; v != 0; v = nodes_[v].parent) {
    out.push_back(candidates_[nodes_[v].candidate_pos]);
  }
  return ActionSet(std::move(out));
}

std::vector<std::uint32_t> KLevelTree::path_of(const ActionSet& action) const {
  if (action.size() != depth_) throw StateError("action size does not match tree depth");
  std::vector<std::uint32_t> path{0};
  std::uint32_t v = 0;
  for (NodeId id : action.nodes()) {
    const auto it = std::lower_bound(candidates_.begin(), candidates_.end(), id);
    if (it == candidates_.end() || *it != id) throw StateError("action node is not a tree candidate");
    const auto pos = static_cast<std::size_t>(it - candidates_.begin());
    const std::size_t first = first_child_pos(v);
    if (pos < first || pos - first >= child_slots(v)) throw StateError("unknown leaf");
    const std::uint32_t c = child(v, pos - first);
    if (c == kNoChild) throw StateError("unknown leaf");
    path.push_back(c);
    v = c;
  }
  return path;
}

AlphaList KLevelTree::leaf_values() const {
  AlphaList out;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    const Node& v = nodes_[i];
    if (v.depth == depth_ && v.visits > 0) out.push_back({action_of(i), v.mean, v.visits});
  }
  std::sort(out.begin(), out.end(),
            [](const ActionValue& a, const ActionValue& b) { return a.action < b.action; });
  return out;
}

FindResult find_step(KLevelTree& tree, double c, double reward_scale) {
  FindResult result;
  result.path.push_back(0);
  std::uint32_t v = 0;
  std::vector<NodeId> chosen;
  const double scale = reward_scale > 0.0 ? reward_scale : 1.0;
  while (tree.node(v).depth < tree.depth()) {
    const std::size_t slots = tree.child_slots(v);
    std::size_t pick = slots;
    for (std::size_t s = 0; s < slots; ++s) {
      const std::uint32_t ch = tree.child(v, s);
      if (ch == KLevelTree::kNoChild || tree.node(ch).visits == 0) {
        pick = s;
        break;
      }
    }
    if (pick == slots) {
      const double log_parent = std::log(static_cast<double>(std::max<std::uint32_t>(1, tree.node(v).visits)));
      double best = -1e300;
      for (std::size_t s = 0; s < slots; ++s) {
        const auto& ch = tree.node(tree.child(v, s));
        const double score = ch.mean / scale + c * std::sqrt(log_parent / ch.visits);
        if (score > best) {
          best = score;
          pick = s;
        }
      }
    }
    v = tree.ensure_child(v, pick);
    result.path.push_back(v);
    chosen.push_back(tree.candidates()[tree.node(v).candidate_pos]);
  }
  result.action = ActionSet(std::move(chosen));
  return result;
}

void update_step(KLevelTree& tree, double reward, const ActionSet& action) {
  for (std::uint32_t v : tree.path_of(action)) {
    auto& node = tree.node(v);
    ++node.visits;
    node.mean += (reward - node.mean) / node.visits;
  }
}

double simulate_step(const UncertainNetwork& net, const EdgeMask& present, const ActionSet& action,
                     std::size_t k, std::size_t T_remaining, std::size_t L,
                     const HistoryContext& history, Rng& rng) {
  const std::size_t n = net.node_count();
  InfluenceState w(n);
  thread_local std::vector<std::uint8_t> chosen;
  chosen.assign(n, 0);
  for (const ActionSet& past : history.executed_rounds) {
    for (NodeId v : past.nodes()) {
      if (v >= n) continue;
      w.set(v);
      chosen[v] = 1;
    }
    diffuse_steps_in_place(net, present, w, L, rng);
  }
  const std::size_t start = w.count();
  if (T_remaining == 0) return 0.0;

  for (NodeId v : action.nodes()) {
    w.set(v);
    chosen[v] = 1;
  }
  diffuse_steps_in_place(net, present, w, L, rng);

  // Rollout actions are drawn from nodes not chosen so far; the planner never
  // observes W, so "chosen" is all it can exclude.
  thread_local std::vector<NodeId> pool;
  thread_local std::vector<NodeId> picked;
  for (std::size_t r = 1; r < T_remaining; ++r) {
    pool.clear();
    for (NodeId v = 0; v < n; ++v) {
      if (!chosen[v]) pool.push_back(v);
    }
    if (pool.size() < k) {
      pool.resize(n);
      for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<NodeId>(i);
    }
    rng.sample_subset(pool, std::min(k, n), picked);
    for (NodeId v : picked) {
      w.set(v);
      chosen[v] = 1;
    }
    diffuse_steps_in_place(net, present, w, L, rng);
  }
  return static_cast<double>(w.count() - start);
}

AlphaList evaluate(const InstantiatedNetwork& inst, std::size_t k, std::size_t T_remaining,
                   std::size_t L, const HistoryContext& history,
                   const std::vector<NodeId>& candidates, const TaspConfig& config,
                   std::uint64_t seed) {
  KLevelTree tree(candidates, k);
  Rng rng(seed);
  const auto scale = static_cast<double>(std::max<std::size_t>(1, inst.network().node_count()));
  const auto started = std::chrono::steady_clock::now();
  for (std::size_t s = 0; s < config.nsim; ++s) {
    if (config.time_budget_ms > 0.0 && s > 0 && s % 64 == 0) {
      const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - started;
      if (elapsed.count() > config.time_budget_ms) break;
    }
    const FindResult found = find_step(tree, config.exploration_c, scale);
    const double r = simulate_step(inst.network(), inst.kept, found.action, k, T_remaining, L, history, rng);
    update_step(tree, r, found.action);
  }
  return tree.leaf_values();
}

std::vector<ActionValue> aggregate(std::span<const WeightedAlpha> alphas, Aggregation mode) {
  struct Acc {
    std::vector<std::pair<double, double>> entries;  // (log P, value)
    std::size_t visits = 0;
  };
  std::map<ActionSet, Acc> by_action;
  for (const WeightedAlpha& wa : alphas) {
    for (const ActionValue& av : wa.alpha) {
      auto& acc = by_action[av.action];
      acc.entries.emplace_back(wa.log_probability, av.value);
      acc.visits += av.visits;
    }
  }
  if (by_action.empty()) throw ValidationError("no determinization produced any estimate");

  std::vector<ActionValue> out;
  out.reserve(by_action.size());
  for (auto& [action, acc] : by_action) {
    double value = 0.0;
    if (mode == Aggregation::sample_mean) {
      for (const auto& e : acc.entries) value += e.second;
      value /= static_cast<double>(acc.entries.size());
    } else {
      double max_log = -1e300;
      for (const auto& e : acc.entries) max_log = std::max(max_log, e.first);
      double norm = 0.0;
      for (const auto& e : acc.entries) norm += std::exp(e.first - max_log);
      for (const auto& e : acc.entries) value += std::exp(e.first - max_log) / norm * e.second;
    }
    out.push_back({action, value, acc.visits});
  }
  return out;
}

TaspResult tasp_solve(const UncertainNetwork& net, std::size_t k, std::size_t T_remaining,
                      std::size_t L, const HistoryContext& history, const TaspConfig& config,
                      std::uint64_t seed) {
  config.validate();
  const std::size_t n = net.node_count();
  if (k > n) {
    throw CapacityError("K=" + std::to_string(k) + " exceeds the " + std::to_string(n) +
                        " nodes of the network");
  }
  TaspResult result;
  if (k == 0) return result;

  std::set<NodeId> used;
  for (const ActionSet& a : history.executed_rounds) used.insert(a.nodes().begin(), a.nodes().end());
  std::vector<NodeId> candidates;
  for (NodeId v = 0; v < n; ++v) {
    if (!used.count(v)) candidates.push_back(v);
  }
  if (candidates.size() < k) {
    candidates.resize(n);
    for (NodeId v = 0; v < n; ++v) candidates[v] = v;
  }

  const std::size_t delta = config.delta_count;
  std::vector<WeightedAlpha> alphas(delta);
  auto run_one = [&](std::size_t d) {
    Rng sampler(derive_seed(seed, d, 0));
    const InstantiatedNetwork inst = sample_instantiation(net, sampler);
    alphas[d].alpha = evaluate(inst, k, T_remaining, L, history, candidates, config, derive_seed(seed, d, 1));
    alphas[d].log_probability = inst.log_probability;
  };
  if (config.execution == Execution::parallel && delta > 1) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(delta); ++d) run_one(static_cast<std::size_t>(d));
  } else {
    for (std::size_t d = 0; d < delta; ++d) run_one(d);
  }

  result.ranking = aggregate(alphas, config.aggregation);
  const ActionValue* best = &result.ranking.front();
  for (const ActionValue& av : result.ranking) {
    if (av.value > best->value) best = &av;
  }
  result.action = best->action;
  result.expected_reward = best->value;
  return result;
}

}  // namespace dime
