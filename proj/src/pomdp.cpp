#include "dime/pomdp.hpp"

#include <algorithm>
#include <set>

#include "dime/errors.hpp"

namespace dime {

bool InfluenceState::contains(const InfluenceState& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (other.bits_[i] && !bits_[i]) return false;
  }
  return true;
}

ActionSet::ActionSet(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw ValidationError("action contains duplicate nodes");
  }
}

bool ActionSet::contains(NodeId v) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), v);
}

void ActionSet::check_bounds(std::size_t n) const {
  if (!nodes_.empty() && nodes_.back() >= n) {
    throw ValidationError("action node " + std::to_string(nodes_.back()) + " >= N");
  }
}

std::string ActionSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(nodes_[i]);
  }
  return out;
}

std::vector<std::size_t> observation_edges(const ActionSet& action, const UncertainNetwork& net) {
  std::vector<std::size_t> out;
  for (NodeId v : action.nodes()) {
    if (v >= net.node_count()) continue;
    for (const auto& arc : net.out_arcs(v)) {
      if (arc.uncertain_index >= 0) out.push_back(static_cast<std::size_t>(arc.uncertain_index));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

long reward(const PomdpState& prev, const PomdpState& next) {
  if (!next.w.contains(prev.w)) {
    throw StateError("influence state is not monotone: a node lost its influence");
  }
  return static_cast<long>(next.w.count()) - static_cast<long>(prev.w.count());
}

PomdpState sample_initial_state(const UncertainNetwork& net, Rng& rng) {
  PomdpState s{InfluenceState(net.node_count()), EdgeMask(net.uncertain_count(), 0)};
  for (std::size_t i = 0; i < net.uncertain_count(); ++i) {
    s.f[i] = rng.bernoulli(*net.uncertain_edge(i).u) ? 1 : 0;
  }
  return s;
}

std::vector<NodeId> executed_nodes(const SessionHistory& history) {
  std::set<NodeId> seen;
  for (const RoundRecord& r : history.rounds) seen.insert(r.executed.nodes().begin(), r.executed.nodes().end());
  return {seen.begin(), seen.end()};
}

}  // namespace dime
