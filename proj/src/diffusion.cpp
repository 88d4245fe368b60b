#include "dime/diffusion.hpp"

#include <bit>
#include <cmath>

#include <omp.h>

#include "dime/errors.hpp"

namespace dime {

namespace {

inline bool arc_present(const UncertainNetwork::Arc& arc, const EdgeMask& present) {
  return arc.uncertain_index < 0 || present[static_cast<std::size_t>(arc.uncertain_index)];
}

struct BatchSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

BatchSums run_batch(const UncertainNetwork& net, std::span<const ActionSet> actions, std::size_t L,
                    std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  BatchSums out;
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = static_cast<double>(simulate_fixed_actions(net, actions, L, rng));
    out.sum += v;
    out.sum_sq += v * v;
  }
  return out;
}

MonteCarloEstimate finish(const std::vector<BatchSums>& batches, std::size_t samples) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const BatchSums& b : batches) {
    sum += b.sum;
    sum_sq += b.sum_sq;
  }
  MonteCarloEstimate est;
  est.samples = samples;
  if (samples == 0) return est;
  const auto n = static_cast<double>(samples);
  est.mean = sum / n;
  if (samples > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

}  // namespace

void diffuse_one_step_in_place(const UncertainNetwork& net, const EdgeMask& present,
                               InfluenceState& w, Rng& rng) {
  thread_local std::vector<NodeId> newly;
  newly.clear();
  const std::size_t n = net.node_count();
  for (NodeId x = 0; x < n; ++x) {
    if (!w.test(x)) continue;
    for (const auto& arc : net.out_arcs(x)) {
      if (w.test(arc.dst) || !arc_present(arc, present)) continue;
      if (rng.bernoulli(arc.p)) newly.push_back(arc.dst);
    }
  }
  for (NodeId y : newly) w.set(y);
}

void diffuse_steps_in_place(const UncertainNetwork& net, const EdgeMask& present,
                            InfluenceState& w, std::size_t steps, Rng& rng) {
  for (std::size_t s = 0; s < steps; ++s) {
    if (w.count() == w.size()) return;
    diffuse_one_step_in_place(net, present, w, rng);
  }
}

InfluenceState diffuse_one_step(const InstantiatedNetwork& inst, InfluenceState w, Rng& rng) {
  diffuse_one_step_in_place(inst.network(), inst.kept, w, rng);
  return w;
}

InfluenceState diffuse_L_steps(const InstantiatedNetwork& inst, InfluenceState w, std::size_t L,
                               Rng& rng) {
  diffuse_steps_in_place(inst.network(), inst.kept, w, L, rng);
  return w;
}

GenerativeSample generative_step(const UncertainNetwork& net, const PomdpState& state,
                                 const ActionSet& action, std::size_t k, std::size_t L, Rng& rng) {
  if (action.size() != k) {
    throw ValidationError("action has " + std::to_string(action.size()) + " nodes, expected K=" +
                          std::to_string(k));
  }
  action.check_bounds(net.node_count());
  if (state.f.size() != net.uncertain_count() || state.w.size() != net.node_count()) {
    throw ValidationError("state does not match network dimensions");
  }
  GenerativeSample sample{state, {}, 0};
  for (NodeId v : action.nodes()) sample.next_state.w.set(v);
  for (std::size_t idx : observation_edges(action, net)) {
    sample.observation.observed.push_back({idx, state.f[idx] != 0});
  }
  diffuse_steps_in_place(net, state.f, sample.next_state.w, L, rng);
  sample.reward = reward(state, sample.next_state);
  return sample;
}

std::size_t simulate_fixed_actions(const UncertainNetwork& net, std::span<const ActionSet> actions,
                                   std::size_t L, Rng& rng) {
  PomdpState s = sample_initial_state(net, rng);
  for (const ActionSet& a : actions) {
    for (NodeId v : a.nodes()) s.w.set(v);
    diffuse_steps_in_place(net, s.f, s.w, L, rng);
  }
  return s.w.count();
}

MonteCarloEstimate estimate_influence_serial(const UncertainNetwork& net,
                                             std::span<const ActionSet> actions, std::size_t L,
                                             std::size_t samples, std::uint64_t seed) {
  const std::size_t n_batches = (samples + kMonteCarloBatch - 1) / kMonteCarloBatch;
  std::vector<BatchSums> batches(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t count = std::min(kMonteCarloBatch, samples - b * kMonteCarloBatch);
    batches[b] = run_batch(net, actions, L, count, derive_seed(seed, b));
  }
  return finish(batches, samples);
}

MonteCarloEstimate estimate_influence_parallel(const UncertainNetwork& net,
                                               std::span<const ActionSet> actions, std::size_t L,
                                               std::size_t samples, std::uint64_t seed) {
  const std::size_t n_batches = (samples + kMonteCarloBatch - 1) / kMonteCarloBatch;
  std::vector<BatchSums> batches(n_batches);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_batches); ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const std::size_t count = std::min(kMonteCarloBatch, samples - ub * kMonteCarloBatch);
    batches[ub] = run_batch(net, actions, L, count, derive_seed(seed, ub));
  }
  return finish(batches, samples);
}

namespace exact {

void check_capacity(const UncertainNetwork& net) {
  if (net.node_count() > kMaxNodes) {
    throw CapacityError("exact enumeration supports at most 64 nodes");
  }
  if (net.uncertain_count() > kMaxUncertain) {
    throw CapacityError("exact enumeration supports at most 12 uncertain edges");
  }
}

std::uint64_t action_mask(const ActionSet& action) {
  std::uint64_t m = 0;
  for (NodeId v : action.nodes()) {
    if (v >= kMaxNodes) throw CapacityError("node id beyond exact enumeration range");
    m |= std::uint64_t{1} << v;
  }
  return m;
}

EdgeMask mask_from_index(std::size_t m_u, std::uint64_t index) {
  EdgeMask mask(m_u, 0);
  for (std::size_t i = 0; i < m_u; ++i) mask[i] = (index >> i) & 1U;
  return mask;
}

double mask_probability(const UncertainNetwork& net, const EdgeMask& mask) {
  double p = 1.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double u = *net.uncertain_edge(i).u;
    p *= mask[i] ? u : 1.0 - u;
  }
  return p;
}

namespace {

void expand_step(const UncertainNetwork& net, const EdgeMask& present, std::uint64_t w,
                 double weight, Distribution& out) {
  const std::size_t n = net.node_count();
  std::uint64_t certain_hits = 0;
  std::vector<double> fail(n, 1.0);  // P(no coin into y succeeds)
  std::size_t coins = 0;
  for (NodeId x = 0; x < n; ++x) {
    if (!((w >> x) & 1U)) continue;
    for (const auto& arc : net.out_arcs(x)) {
      if (((w >> arc.dst) & 1U) || !arc_present(arc, present) || arc.p <= 0.0) continue;
      if (arc.p >= 1.0) {
        certain_hits |= std::uint64_t{1} << arc.dst;
      } else {
        fail[arc.dst] *= 1.0 - arc.p;
        ++coins;
      }
    }
  }
  if (coins > kMaxCoinEvents) {
    throw CapacityError("exact enumeration exceeds 24 stochastic coin events in one step");
  }
  std::vector<NodeId> targets;
  for (NodeId y = 0; y < n; ++y) {
    if (fail[y] < 1.0 && !((certain_hits >> y) & 1U)) targets.push_back(y);
  }
  const std::uint64_t base = w | certain_hits;
  const std::size_t t = targets.size();
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << t); ++subset) {
    double p = weight;
    std::uint64_t next = base;
    for (std::size_t i = 0; i < t; ++i) {
      const double f = fail[targets[i]];
      if ((subset >> i) & 1U) {
        p *= 1.0 - f;
        next |= std::uint64_t{1} << targets[i];
      } else {
        p *= f;
      }
    }
    if (p > 0.0) out[next] += p;
  }
}

}  // namespace

Distribution diffuse(const UncertainNetwork& net, const EdgeMask& present, std::uint64_t w,
                     std::size_t steps) {
  Distribution d{{w, 1.0}};
  return diffuse(net, present, d, steps);
}

Distribution diffuse(const UncertainNetwork& net, const EdgeMask& present,
                     const Distribution& start, std::size_t steps) {
  Distribution current = start;
  for (std::size_t s = 0; s < steps; ++s) {
    Distribution next;
    next.reserve(current.size() * 2);
    for (const auto& [w, p] : current) expand_step(net, present, w, p, next);
    current = std::move(next);
  }
  return current;
}

}  // namespace exact

double exact_expected_influence(const UncertainNetwork& net, std::span<const ActionSet> actions,
                                std::size_t T, std::size_t L) {
  if (actions.size() != T) throw ValidationError("number of actions does not match T");
  exact::check_capacity(net);
  std::vector<std::uint64_t> seeds;
  for (const ActionSet& a : actions) {
    a.check_bounds(net.node_count());
    seeds.push_back(exact::action_mask(a));
  }
  const std::size_t m_u = net.uncertain_count();
  double total = 0.0;
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << m_u); ++idx) {
    const EdgeMask mask = exact::mask_from_index(m_u, idx);
    const double pf = exact::mask_probability(net, mask);
    if (pf == 0.0) continue;
    exact::Distribution dist{{0, 1.0}};
    for (std::uint64_t seed_mask : seeds) {
      exact::Distribution seeded;
      for (const auto& [w, p] : dist) seeded[w | seed_mask] += p;
      dist = exact::diffuse(net, mask, seeded, L);
    }
    double expectation = 0.0;
    for (const auto& [w, p] : dist) expectation += p * std::popcount(w);
    total += pf * expectation;
  }
  return total;
}

}  // namespace dime
