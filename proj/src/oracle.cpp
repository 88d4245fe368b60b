#include "dime/oracle.hpp"

#include <bit>
#include <functional>
#include <map>
#include <unordered_map>

#include "dime/diffusion.hpp"
#include "dime/errors.hpp"

namespace dime {

namespace {

std::vector<ActionSet> all_k_subsets(std::size_t n, std::size_t k) {
  std::vector<ActionSet> out;
  std::vector<NodeId> cur;
  std::function<void(NodeId)> rec = [&](NodeId from) {
    if (cur.size() == k) {
      out.emplace_back(cur);
      return;
    }
    for (NodeId v = from; v < n; ++v) {
      cur.push_back(v);
      rec(v + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const {
    return static_cast<std::size_t>(mix64(p.first ^ mix64(p.second)));
  }
};

// Joint belief over (W mask, F index).
using Belief = std::map<std::pair<std::uint64_t, std::uint64_t>, double>;

class PolicySolver {
 public:
  PolicySolver(const UncertainNetwork& net, std::size_t K, std::size_t L)
      : net_(net), L_(L), m_u_(net.uncertain_count()), actions_(all_k_subsets(net.node_count(), K)) {
    for (const ActionSet& a : actions_) {
      std::uint64_t theta = 0;
      for (std::size_t idx : observation_edges(a, net)) theta |= std::uint64_t{1} << idx;
      theta_.push_back(theta);
      seed_.push_back(exact::action_mask(a));
    }
  }

  Belief initial() const {
    Belief b;
    for (std::uint64_t f = 0; f < (std::uint64_t{1} << m_u_); ++f) {
      const double p = exact::mask_probability(net_, exact::mask_from_index(m_u_, f));
      if (p > 0.0) b[{0, f}] += p;
    }
    return b;
  }

  // Unnormalized: the sum over entries is the probability of the history.
  double value(const Belief& b, std::size_t rounds, ActionSet* best_action) {
    if (rounds == 0) {
      double v = 0.0;
      for (const auto& [key, p] : b) v += p * std::popcount(key.first);
      return v;
    }
    double best = -1.0;
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      double v = 0.0;
      if (rounds == 1) {
        for (const auto& [key, p] : b) v += p * expected_count(key.first | seed_[i], key.second);
      } else {
        std::map<std::uint64_t, Belief> by_observation;
        for (const auto& [key, p] : b) {
          Belief& next = by_observation[key.second & theta_[i]];
          for (const auto& [w, q] : step(key.first | seed_[i], key.second)) next[{w, key.second}] += p * q;
        }
        for (const auto& [obs, next] : by_observation) v += value(next, rounds - 1, nullptr);
      }
      if (v > best + 1e-12) {
        best = v;
        if (best_action) *best_action = actions_[i];
      }
    }
    return best;
  }

 private:
  const exact::Distribution& step(std::uint64_t w, std::uint64_t f) {
    const auto key = std::make_pair(w, f);
    auto it = steps_.find(key);
    if (it == steps_.end()) {
      it = steps_.emplace(key, exact::diffuse(net_, exact::mask_from_index(m_u_, f), w, L_)).first;
    }
    return it->second;
  }

  double expected_count(std::uint64_t w, std::uint64_t f) {
    double v = 0.0;
    for (const auto& [next, q] : step(w, f)) v += q * std::popcount(next);
    return v;
  }

  const UncertainNetwork& net_;
  std::size_t L_;
  std::size_t m_u_;
  std::vector<ActionSet> actions_;
  std::vector<std::uint64_t> theta_;
  std::vector<std::uint64_t> seed_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, exact::Distribution, PairHash> steps_;
};

}  // namespace

PolicyValue brute_force_policy_value(const UncertainNetwork& net, std::size_t K, std::size_t T,
                                     std::size_t L) {
  if (net.node_count() > oracle::kMaxNodes || net.uncertain_count() > oracle::kMaxUncertain ||
      T > oracle::kMaxRounds || K > oracle::kMaxK) {
    throw CapacityError("instance too large for the policy oracle (N<=8, |E_u|<=3, T<=2, K<=2)");
  }
  if (K > net.node_count()) throw CapacityError("K exceeds the node count");
  exact::check_capacity(net);
  PolicySolver solver(net, K, L);
  PolicyValue out;
  out.value = solver.value(solver.initial(), T, &out.first_action);
  return out;
}

double uniform_random_policy_value(const UncertainNetwork& net, std::size_t K, std::size_t T,
                                   std::size_t L) {
  if (K > net.node_count()) throw CapacityError("K exceeds the node count");
  const std::vector<ActionSet> subsets = all_k_subsets(net.node_count(), K);
  std::vector<std::size_t> idx(T, 0);
  std::vector<ActionSet> plan(T);
  double total = 0.0;
  std::size_t count = 0;
  while (true) {
    for (std::size_t t = 0; t < T; ++t) plan[t] = subsets[idx[t]];
    total += exact_expected_influence(net, plan, T, L);
    ++count;
    std::size_t t = 0;
    while (t < T && ++idx[t] == subsets.size()) idx[t++] = 0;
    if (t == T) break;
  }
  return total / static_cast<double>(count);
}

PolicyValue best_single_round_set(const UncertainNetwork& net, std::size_t K, std::size_t L) {
  if (K > net.node_count()) throw CapacityError("K exceeds the node count");
  PolicyValue out;
  out.value = -1.0;
  for (const ActionSet& a : all_k_subsets(net.node_count(), K)) {
    const std::vector<ActionSet> plan{a};
    const double v = exact_expected_influence(net, plan, 1, L);
    if (v > out.value + 1e-12) {
      out.value = v;
      out.first_action = a;
    }
  }
  return out;
}

UncertainNetwork directed_star(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId v = 1; v < n; ++v) edges.push_back({0, v, 1.0, std::nullopt});
  return UncertainNetwork(n, std::move(edges));
}

UncertainNetwork complete_uncertain_network(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      if (a != b) edges.push_back({a, b, 1.0, 0.5});
    }
  }
  return UncertainNetwork(n, std::move(edges));
}

Theorem1Check verify_theorem1(std::size_t n) {
  if (n < 2) throw ValidationError("n must be at least 2");
  const UncertainNetwork star = directed_star(n);
  // p = 1 and no uncertain edges: every coin is decided without drawing.
  Rng unused(0);
  double sum = 0.0;
  double best = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    const std::vector<ActionSet> plan{ActionSet{v}};
    const auto reach = static_cast<double>(simulate_fixed_actions(star, plan, 1, unused));
    sum += reach;
    best = std::max(best, reach);
  }
  Theorem1Check out;
  out.random_policy_value = sum / static_cast<double>(n);
  out.opt_full = best;
  out.ratio = out.random_policy_value / out.opt_full;
  return out;
}

UncertainNetwork theorem3_path(double epsilon) {
  return UncertainNetwork(4, {{0, 1, 1.0, 1.0 - epsilon}, {1, 2, 1.0, epsilon}, {2, 3, 1.0, epsilon}});
}

Theorem3Check verify_theorem3(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0,1)");
  const UncertainNetwork path = theorem3_path(epsilon);
  const std::vector<EdgeObservation> psi1{{0, true}};
  const std::vector<EdgeObservation> psi2{{2, true}};
  const UncertainNetwork given1 = apply_observations(path, psi1).network;
  const UncertainNetwork given2 = apply_observations(path, psi2).network;
  auto f = [](const UncertainNetwork& net, ActionSet a) {
    const std::vector<ActionSet> plan{std::move(a)};
    return exact_expected_influence(net, plan, 1, 2);
  };
  Theorem3Check out;
  out.f_abc_psi2 = f(given2, {0, 1, 2});
  out.f_ac_psi2 = f(given2, {0, 2});
  out.f_ab_psi1 = f(given1, {0, 1});
  out.f_a_psi1 = f(given1, {0});
  out.marginal_psi2 = out.f_abc_psi2 - out.f_ac_psi2;
  out.marginal_psi1 = out.f_ab_psi1 - out.f_a_psi1;
  return out;
}

}  // namespace dime
