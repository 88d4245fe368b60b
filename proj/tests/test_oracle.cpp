#include <doctest.h>

#include "dime/diffusion.hpp"
#include "dime/errors.hpp"
#include "dime/oracle.hpp"
#include "helpers.hpp"

using namespace dime;

TEST_CASE("trivial policy values") {
  const UncertainNetwork one(1, {});
  CHECK(brute_force_policy_value(one, 1, 1, 1).value == 1.0);
  const UncertainNetwork iso(4, {});
  CHECK(brute_force_policy_value(iso, 2, 2, 1).value == 4.0);
  CHECK(brute_force_policy_value(iso, 1, 1, 1).first_action == ActionSet{0});
}

TEST_CASE("policy value bounds and monotonicity in T") {
  const auto net = testing::fig2();
  const UncertainNetwork small(6, {{0, 1, 0.5, 0.6}, {1, 2, 0.5, {}}, {2, 3, 0.7, 0.5}, {3, 4, 0.5, {}},
                                   {4, 5, 0.5, 0.4}, {5, 0, 0.5, {}}});
  for (std::size_t K : {1u, 2u}) {
    const double v1 = brute_force_policy_value(small, K, 1, 1).value;
    const double v2 = brute_force_policy_value(small, K, 2, 1).value;
    CHECK(v1 >= double(K));
    CHECK(v2 >= v1 - 1e-12);
    CHECK(v2 >= uniform_random_policy_value(small, K, 2, 1) - 1e-12);
    CHECK(v1 == doctest::Approx(best_single_round_set(small, K, 1).value));
  }
  CHECK_THROWS_AS(brute_force_policy_value(net, 1, 1, 1), CapacityError);
  CHECK_THROWS_AS(brute_force_policy_value(small, 3, 1, 1), CapacityError);
  CHECK_THROWS_AS(brute_force_policy_value(small, 1, 3, 1), CapacityError);
}

TEST_CASE("adaptivity is worth something") {
  // 0 -> 1 is uncertain; observing it decides whether 1 is worth picking in round 2
  const UncertainNetwork net(4, {{0, 1, 1.0, 0.5}, {1, 2, 1.0, {}}, {1, 3, 1.0, {}}});
  const double adaptive = brute_force_policy_value(net, 1, 2, 1).value;
  double open_loop = 0.0;
  for (NodeId a = 0; a < 4; ++a)
    for (NodeId b = 0; b < 4; ++b)
      open_loop = std::max(open_loop, exact_expected_influence(net, std::vector<ActionSet>{ActionSet{a}, ActionSet{b}}, 2, 1));
  CHECK(adaptive >= open_loop - 1e-12);
}

TEST_CASE("theorem 1 construction") {
  const auto c3 = verify_theorem1(3);
  CHECK(c3.random_policy_value == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(c3.opt_full == 3.0);
  const auto c2 = verify_theorem1(2);
  CHECK(c2.random_policy_value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(c2.opt_full == 2.0);
  for (std::size_t n : {2u, 3u, 10u, 100u}) {
    const auto c = verify_theorem1(n);
    CHECK(c.random_policy_value == doctest::Approx(2.0 - 1.0 / double(n)).epsilon(1e-12));
    CHECK(c.opt_full == double(n));
    CHECK(c.ratio == doctest::Approx(2.0 / n - 1.0 / (double(n) * n)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(verify_theorem1(1), ValidationError);

  // the random-choice value on the star, computed by the policy oracle
  CHECK(uniform_random_policy_value(directed_star(3), 1, 1, 1) == doctest::Approx(5.0 / 3.0));
  CHECK(brute_force_policy_value(directed_star(3), 1, 1, 1).value == doctest::Approx(3.0));
  CHECK(complete_uncertain_network(3).uncertain_count() == 6);
}

TEST_CASE("theorem 3 construction") {
  for (double eps : {0.01, 0.5, 0.2}) {
    const auto c = verify_theorem3(eps);
    CHECK(c.marginal_psi2 == doctest::Approx(eps).epsilon(1e-12));
    CHECK(c.marginal_psi1 == doctest::Approx(eps * eps).epsilon(1e-12));
    CHECK(c.marginal_psi2 > c.marginal_psi1);
    CHECK(c.f_ab_psi1 == doctest::Approx(2 + eps + eps * eps).epsilon(1e-12));
    CHECK(c.f_a_psi1 == doctest::Approx(2 + eps).epsilon(1e-12));
  }
  const auto c = verify_theorem3(0.01);
  CHECK(c.f_abc_psi2 == doctest::Approx(4.0));
  CHECK(c.f_ac_psi2 == doctest::Approx(3.99));
  CHECK_THROWS_AS(verify_theorem3(0.0), ValidationError);
  CHECK_THROWS_AS(verify_theorem3(1.0), ValidationError);
}
