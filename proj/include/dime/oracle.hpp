#pragma once

#include <cstddef>

#include "dime/network.hpp"
#include "dime/pomdp.hpp"

namespace dime {

struct PolicyValue {
  double value = 0.0;
  ActionSet first_action;  // lexicographically smallest optimal first action
};

namespace oracle {
inline constexpr std::size_t kMaxNodes = 8;
inline constexpr std::size_t kMaxUncertain = 3;
inline constexpr std::size_t kMaxRounds = 2;
inline constexpr std::size_t kMaxK = 2;
}  // namespace oracle

/// Exact value of the optimal adaptive policy: at each round maximize over all
/// K-subsets, take the expectation over the revealed Θ(a) outcomes and the
/// diffusion coins, and condition the joint (W, F) belief on what was seen.
/// Throws CapacityError beyond N <= 8, |E_u| <= 3, T <= 2, K <= 2.
PolicyValue brute_force_policy_value(const UncertainNetwork& net, std::size_t K, std::size_t T,
                                     std::size_t L);

/// Exact value of picking a uniformly random K-subset in every round.
double uniform_random_policy_value(const UncertainNetwork& net, std::size_t K, std::size_t T,
                                   std::size_t L);

/// Expected final count of an open-loop plan (see exact_expected_influence)
/// maximized over all K-subsets for T = 1.
PolicyValue best_single_round_set(const UncertainNetwork& net, std::size_t K, std::size_t L);

struct Theorem1Check {
  double random_policy_value = 0.0;  // 2 - 1/n
  double opt_full = 0.0;             // n
  double ratio = 0.0;
};

/// Directed star with p = 1 from the center, K = L = T = 1. Throws
/// ValidationError for n < 2.
Theorem1Check verify_theorem1(std::size_t n);

/// The n-node complete uncertain network (u = 0.5, p = 1) whose ground truth
/// the star of verify_theorem1 is.
UncertainNetwork complete_uncertain_network(std::size_t n);
UncertainNetwork directed_star(std::size_t n);

struct Theorem3Check {
  double marginal_psi2 = 0.0;  // E[f(a,b,c)|Ψ2] - E[f(a,c)|Ψ2]
  double marginal_psi1 = 0.0;  // E[f(a,b)|Ψ1] - E[f(a)|Ψ1]
  double f_abc_psi2 = 0.0;
  double f_ac_psi2 = 0.0;
  double f_ab_psi1 = 0.0;
  double f_a_psi1 = 0.0;
};

/// Path a->b->c->d with u = (1-ε, ε, ε), p = 1, L = 2. Ψ1 fixes e1 present;
/// Ψ2 fixes e3 present and leaves e1 at 1-ε. Throws ValidationError unless
/// 0 < ε < 1.
Theorem3Check verify_theorem3(double epsilon);
UncertainNetwork theorem3_path(double epsilon);

}  // namespace dime
