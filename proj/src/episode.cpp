#include "dime/episode.hpp"

#include <algorithm>
#include <sstream>

#include "dime/diffusion.hpp"

namespace dime {

GroundTruth GroundTruth::sample(const UncertainNetwork& net, Rng& rng) {
  GroundTruth g;
  g.network = net;
  g.present = sample_instantiation(net, rng).kept;
  return g;
}

bool GroundTruth::edge_exists(NodeId src, NodeId dst) const {
  if (const auto idx = network.find_uncertain(src, dst)) return present[*idx] != 0;
  return network.has_edge(src, dst);
}

long indirect_influence(std::size_t total_influenced, std::size_t K, std::size_t T) {
  return static_cast<long>(total_influenced) - static_cast<long>(K * T);
}

namespace {

ActionSet random_action(std::size_t n, std::size_t K, const std::vector<std::uint8_t>& used, Rng& rng) {
  std::vector<NodeId> pool;
  for (NodeId v = 0; v < n; ++v) {
    if (!used[v]) pool.push_back(v);
  }
  if (pool.size() < K) {
    pool.resize(n);
    for (NodeId v = 0; v < n; ++v) pool[v] = v;
  }
  std::vector<NodeId> picked;
  rng.sample_subset(pool, K, picked);
  return ActionSet(std::move(picked));
}

std::string join(const ActionSet& a) {
  std::string out;
  for (NodeId v : a.nodes()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(v);
  }
  return out;
}

}  // namespace

EpisodeResult run_episode(Strategy& strategy, const GroundTruth& truth, std::size_t K,
                          std::size_t T, std::size_t L, const EpisodeOptions& options,
                          std::uint64_t seed) {
  const std::size_t n = truth.network.node_count();
  Rng diffusion_rng(derive_seed(seed, 1));
  Rng deviation_rng(derive_seed(seed, 2));

  std::vector<std::size_t> rounds(T);
  for (std::size_t t = 0; t < T; ++t) rounds[t] = t;
  std::vector<std::size_t> deviate;
  deviation_rng.sample_subset(rounds, std::min(options.deviations, T), deviate);
  std::sort(deviate.begin(), deviate.end());

  EpisodeResult result;
  InfluenceState w(n);
  std::vector<std::uint8_t> used(n, 0);
  for (std::size_t t = 0; t < T; ++t) {
    RoundLog log;
    log.round = t + 1;
    log.recommended = strategy.recommend();
    log.executed = std::binary_search(deviate.begin(), deviate.end(), t)
                       ? random_action(n, K, used, deviation_rng)
                       : log.recommended;

    const UncertainNetwork& planning = strategy.network();
    for (std::size_t idx : observation_edges(log.executed, planning)) {
      const Edge& e = planning.uncertain_edge(idx);
      log.observations.push_back({idx, truth.edge_exists(e.src, e.dst)});
    }
    strategy.record_execution(log.executed, log.observations);

    for (NodeId v : log.executed.nodes()) {
      w.set(v);
      used[v] = 1;
    }
    diffuse_steps_in_place(truth.network, truth.present, w, L, diffusion_rng);
    log.influenced = w.count();
    result.rounds.push_back(std::move(log));
  }
  result.total_influenced = w.count();
  result.indirect = indirect_influence(result.total_influenced, K, T);
  return result;
}

std::string episode_to_csv(const EpisodeResult& result) {
  std::ostringstream out;
  out << "round,recommended,executed,observed_edges,cumulative_influenced\n";
  for (const RoundLog& r : result.rounds) {
    out << r.round << ',' << join(r.recommended) << ',' << join(r.executed) << ',';
    for (std::size_t i = 0; i < r.observations.size(); ++i) {
      if (i) out << ' ';
      out << r.observations[i].uncertain_edge_index << ':' << (r.observations[i].exists ? 1 : 0);
    }
    out << ',' << r.influenced << '\n';
  }
  return out.str();
}

}  // namespace dime
