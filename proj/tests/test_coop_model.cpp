#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "branchsim/coop_model.hpp"
#include "branchsim/errors.hpp"

using namespace branchsim;

TEST_CASE("coop_step kernel") {
  Rng rng(11);
  const CoopParams mid{0.7, 0.6};
  for (int i = 0; i < 200; ++i) {
    CHECK(coop_step({0, 5}, mid, rng).y == 0);
    CHECK(coop_step({5, 0}, mid, rng).y == 0);
  }
  const CoopParams ones{1.0, 1.0};
  for (int i = 0; i < 50; ++i) {
    const CoopState next = coop_step({1, 1}, ones, rng);
    CHECK(next.x == 4);
    CHECK(next.y == 2);
  }

  // E[min(X_1, Y_1)] from (1,1) is h(p,q).
  const CoopParams pq{0.9, 0.9};
  const int n = 1000000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const CoopState next = coop_step({1, 1}, pq, rng);
    const double z = static_cast<double>(next.z());
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.796904) < 4.0 * se);
}

TEST_CASE("h_exact enumerates the next-step minimum") {
  CHECK(h_exact({1.0, 1.0}) == 2.0);
  CHECK(h_exact({0.2, 0.0}) == 0.0);
  CHECK(h_exact({0.9, 0.0}) == 0.0);
  CHECK(h_exact({0.0, 0.7}) == 0.0);
  CHECK(h_exact({0.9, 0.9}) == doctest::Approx(1.796904).epsilon(1e-9));
}

TEST_CASE("h_polynomial agrees with the enumeration everywhere") {
  CHECK(h_polynomial({1.0, 1.0}) == 2.0);
  CHECK(h_polynomial({0.0, 0.4}) == 0.0);
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const CoopParams params{rng.next_unit(), rng.next_unit()};
    INFO("p=", params.p, " q=", params.q);
    CHECK(std::abs(h_polynomial(params) - h_exact(params)) < 1e-12);
  }
  // At q = 1 the polynomial collapses to 2p.
  for (double p = 0.0; p <= 1.0; p += 0.125)
    CHECK(std::abs(h_polynomial({p, 1.0}) - 2.0 * p) < 1e-12);
}

TEST_CASE("joint law container") {
  const JointLaw def;
  CHECK(def.pmf(0, 0) == 1.0);
  CHECK(def.total_mass() == 1.0);
  CHECK(def.is_valid());

  auto law = JointLaw::from_entries({{1, 2, 0.25}, {0, 0, 0.5}, {3, 1, 0.25}},
                                    0.0);
  CHECK(law.pmf(1, 2) == 0.25);
  CHECK(law.pmf(2, 2) == 0.0);
  CHECK(law.tail_min(1) == 0.5);
  CHECK(law.tail_min(2) == 0.0);
  CHECK(law.expected_floor_min(1) == doctest::Approx(0.25 + 0.25));
  const auto mx = law.marginal_x();
  CHECK(mx.pmf(0) == 0.5);
  CHECK(mx.pmf(1) == 0.25);
  CHECK(mx.pmf(3) == 0.25);
  const auto fm = law.floor_min_over(2);
  CHECK(fm.pmf(0) == 1.0);

  CHECK_THROWS_AS(JointLaw::from_entries({{0, 0, 0.5}, {0, 0, 0.5}}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(JointLaw::from_entries({{0, 0, -0.1}}, 0.0),
                  std::invalid_argument);
  CHECK_FALSE(JointLaw::from_entries({{0, 0, 0.5}}, 0.0).is_valid());
  CHECK(JointLaw::from_entries({{0, 0, 0.5}}, 0.5).is_valid());
}

TEST_CASE("exact joint law basics") {
  const CoopParams pq{0.7, 0.3};
  const JointLaw start = exact_joint_law(2, 0, pq);
  CHECK(start.pmf(2, 2) == 1.0);

  const JointLaw ones = exact_joint_law(1, 1, {1.0, 1.0});
  CHECK(ones.pmf(4, 2) == doctest::Approx(1.0).epsilon(1e-15));

  const JointLaw one = exact_joint_law(1, 1, pq);
  CHECK(one.is_valid());
  const double want00 = std::pow(1.0 - 0.3, 4) * std::pow(1.0 - 0.7, 2);
  CHECK(one.pmf(0, 0) == doctest::Approx(want00).epsilon(1e-13));
}

TEST_CASE("one-step marginals are the kernel binomials") {
  const CoopParams pq{0.6, 0.45};
  for (const auto& [x0, y0] :
       std::vector<std::pair<std::int64_t, std::int64_t>>{
           {1, 1}, {2, 3}, {4, 1}, {0, 2}}) {
    const JointLaw law = exact_joint_law_from({x0, y0}, 1, pq);
    const auto mx = law.marginal_x();
    const auto wantx = binomial(2 * (x0 + y0), pq.q);
    const auto my = law.marginal_y();
    const auto wanty = binomial(2 * std::min(x0, y0), pq.p);
    for (std::int64_t v = 0; v <= wantx.max_value(); ++v)
      CHECK(std::abs(mx.pmf(v) - wantx.pmf(v)) < 1e-12);
    for (std::int64_t v = 0; v <= wanty.max_value(); ++v)
      CHECK(std::abs(my.pmf(v) - wanty.pmf(v)) < 1e-12);
  }
}

TEST_CASE("type-2 extinction is absorbing") {
  const CoopParams pq{0.8, 0.7};
  for (const std::int64_t x0 : {1, 3}) {
    const JointLaw law = exact_joint_law_from({x0, 0}, 1, pq);
    double on_axis = 0.0;
    for (const auto& e : law.entries()) {
      CHECK(e.y == 0);
      on_axis += e.prob;
    }
    CHECK(on_axis == doctest::Approx(1.0).epsilon(1e-12));
  }
  const JointLaw dead = exact_joint_law_from({0, 0}, 3, pq);
  CHECK(dead.pmf(0, 0) == 1.0);
}

TEST_CASE("joint law budget controls") {
  const CoopParams pq{0.8, 0.8};
  JointBudget tiny;
  tiny.max_sum = 4;
  const JointLaw lost = exact_joint_law_from({3, 3}, 1, pq, tiny);
  CHECK(lost.truncation_loss() == 1.0);

  CHECK_THROWS_AS(exact_joint_law(1, 7, pq), BudgetExceeded);

  JointBudget cramped;
  cramped.max_states = 3;
  CHECK_THROWS_AS(exact_joint_law(2, 2, pq, cramped), BudgetExceeded);

  // The work guard fires before the step touches the grid.
  JointBudget slow;
  slow.max_step_ops = 10;
  CHECK_THROWS_AS(exact_joint_law(2, 1, pq, slow), BudgetExceeded);
}

TEST_CASE("conditional mean of the minimum is at most 2p min") {
  for (int pi = 1; pi <= 9; ++pi)
    for (int qi = 1; qi <= 9; ++qi) {
      const CoopParams pq{pi * 0.1, qi * 0.1};
      for (std::int64_t x = 0; x <= 5; ++x)
        for (std::int64_t y = 0; y <= 5; ++y) {
          const JointLaw law = exact_joint_law_from({x, y}, 1, pq);
          const double mean_min = law.expected_floor_min(1);
          CHECK(mean_min <=
                2.0 * pq.p * static_cast<double>(std::min(x, y)) + 1e-9);
        }
    }
}

TEST_CASE("expected renormalized Z") {
  for (const CoopParams pq : {CoopParams{0.9, 0.9}, CoopParams{0.8, 0.6}}) {
    const auto one = expected_renormalized_z(1, 1, pq);
    CHECK(std::abs(one.value - h_exact(pq)) < 1e-12);
    CHECK(one.error_bar >= 0.0);
  }
  CHECK(expected_renormalized_z(1, 1, {0.9, 0.9}).value ==
        doctest::Approx(1.796904).epsilon(1e-9));

  const auto sure = expected_renormalized_z(1, 2, {1.0, 1.0});
  CHECK(sure.value == 4.0);
  CHECK(sure.error_bar == 0.0);
}

TEST_CASE("expected renormalized Z by monte carlo") {
  const auto sure = expected_renormalized_z_mc(1, 2, {1.0, 1.0}, 100, 7);
  CHECK(sure.value == 4.0);
  CHECK(sure.error_bar == 0.0);

  const auto mc = expected_renormalized_z_mc(1, 1, {0.9, 0.9}, 40000, 123);
  CHECK(mc.error_bar > 0.0);
  CHECK(std::abs(mc.value - 1.796904) < 5.0 * mc.error_bar);

  const auto solo = expected_renormalized_z_mc(2, 2, {0.8, 0.8}, 5000, 99);
  const auto pooled =
      expected_renormalized_z_mc(2, 2, {0.8, 0.8}, 5000, 99, 0, 0, 8);
  CHECK(solo.value == pooled.value);
  CHECK(solo.error_bar == pooled.error_bar);

  CHECK_THROWS_AS(expected_renormalized_z_mc(1, 1, {0.5, 0.5}, 1, 1),
                  std::domain_error);
}

TEST_CASE("certificate search for the cooperative chain") {
  const auto hot = coop_certificate_search({0.9, 0.9}, 4, 4);
  REQUIRE(hot.has_value());
  CHECK(hot->block_size == 1);
  CHECK(hot->block_time == 1);
  CHECK(hot->value == doctest::Approx(1.796904).epsilon(1e-9));
  CHECK(hot->threshold == 1.0);

  const auto sure = coop_certificate_search({1.0, 1.0}, 2, 2);
  REQUIRE(sure.has_value());
  CHECK(sure->block_size == 1);
  CHECK(sure->block_time == 1);
  CHECK(sure->value == 2.0);

  // Doomed half-plane: the minimum is a supermartingale for p < 1/2.
  for (const double q : {0.5, 0.9})
    CHECK_FALSE(coop_certificate_search({0.4, q}, 2, 3).has_value());

  // A scan requested past the step budget still returns a certificate
  // found inside it, and only throws once the budgeted steps are spent.
  JointBudget budget;
  budget.max_steps = 2;
  const auto inside = coop_certificate_search({0.9, 0.9}, 2, 3, budget);
  REQUIRE(inside.has_value());
  CHECK(inside->block_time == 1);
  CHECK_THROWS_AS(coop_certificate_search({0.4, 0.9}, 2, 3, budget),
                  BudgetExceeded);

  // Monte Carlo variant: acceptance must clear the error bar.
  const auto mc =
      coop_certificate_search({0.9, 0.9}, 2, 2, {}, McMethod{4000, 77});
  REQUIRE(mc.has_value());
  CHECK(mc->block_size == 1);
  CHECK(mc->block_time == 1);
  CHECK(std::abs(mc->value - 1.796904) < 0.1);
}

TEST_CASE("monte carlo survival from (1,1)") {
  const auto sure = coop_survival_mc({1.0, 1.0}, 200, 100000000, 5);
  CHECK(sure.estimate == 1.0);

  const auto doomed = coop_survival_mc({0.4, 0.95}, 10000, 1000000, 6);
  CHECK(doomed.ci99_high < 0.01);

  const auto alive = coop_survival_mc({0.9, 0.9}, 10000, 100000000, 7);
  CHECK(alive.ci99_low > 0.0);

  const auto solo = coop_survival_mc({0.8, 0.8}, 4000, 1000000, 8);
  const auto pooled = coop_survival_mc({0.8, 0.8}, 4000, 1000000, 8, 4);
  CHECK(solo.successes == pooled.successes);
  CHECK(solo.estimate == pooled.estimate);

  CHECK_THROWS_AS(coop_survival_mc({0.8, 0.8}, 0, 100, 1), std::domain_error);
  CHECK_THROWS_AS(coop_survival_mc({0.8, 0.8}, 10, 1, 1), std::domain_error);
}

TEST_CASE("one-step tail matches monte carlo at (0.8, 0.8)") {
  const CoopParams pq{0.8, 0.8};
  const double exact = exact_joint_law(1, 1, pq).tail_min(1);
  Rng rng(2025);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (coop_step({1, 1}, pq, rng).z() >= 1) ++hits;
  const double freq = static_cast<double>(hits) / n;
  const double se = std::sqrt(exact * (1.0 - exact) / n);
  CHECK(std::abs(freq - exact) < 4.0 * se);
}

TEST_CASE("critical q pins the h = 1 crossing") {
  const double q1 = critical_q(1.0);
  CHECK(q1 == doctest::Approx(0.2663852521627632).epsilon(1e-10));
  // Restricted to p = 1 the curve solves 2q^4 - 4q^3 + 4q - 1 = 0.
  CHECK(std::abs(2.0 * std::pow(q1, 4) - 4.0 * std::pow(q1, 3) + 4.0 * q1 -
                 1.0) < 1e-9);

  const double oracle[5] = {0.46577738161886373, 0.37105893413991,
                            0.31986549981138523, 0.28778595276799024,
                            0.2663852521627632};
  for (int i = 0; i < 5; ++i) {
    const double p = 0.6 + 0.1 * i;
    const double qs = critical_q(p);
    CHECK(qs == doctest::Approx(oracle[i]).epsilon(1e-10));
    CHECK(std::abs(h_polynomial({p, qs}) - 1.0) < 1e-9);
  }

  CHECK_THROWS_AS(critical_q(0.5), std::domain_error);
  CHECK_THROWS_AS(critical_q(0.3), std::domain_error);
  CHECK_THROWS_AS(critical_q(1.0, 0.0), std::domain_error);
}

TEST_CASE("one-step domination behind super-additivity") {
  CHECK(domination_check({1, 2}, {2, 1}, {0.3, 0.5}));
  CHECK(domination_check({1, 1}, {1, 1}, {0.7, 0.5}));
  for (const double p : {0.3, 0.7})
    for (std::int64_t x1 = 0; x1 <= 3; ++x1)
      for (std::int64_t y1 = 0; y1 <= 3; ++y1)
        for (std::int64_t x2 = 0; x2 <= 3; ++x2)
          for (std::int64_t y2 = 0; y2 <= 3; ++y2) {
            INFO("p=", p, " s1=(", x1, ",", y1, ") s2=(", x2, ",", y2, ")");
            CHECK(domination_check({x1, y1}, {x2, y2}, {p, 0.5}));
          }
}

TEST_CASE("block lower bound on the renormalized minimum") {
  for (const double p : {0.3, 0.7})
    for (const double q : {0.3, 0.7}) {
      const CoopParams pq{p, q};
      for (const std::int64_t n : {1, 2})
        for (const std::int64_t t : {1, 2})
          for (const std::int64_t k : {0, 1, 2})
            for (const std::int64_t x : {n, 2 * n})
              for (const std::int64_t y : {n, 2 * n}) {
                INFO("p=", p, " q=", q, " n=", n, " t=", t, " k=", k, " x=", x,
                     " y=", y);
                CHECK(grandpas_check(x, y, k, n, t, pq));
              }
    }

  // x = y = N, k = 1: both sides coincide by construction.
  const CoopParams pq{0.3, 0.7};
  const double lhs = exact_joint_law(2, 2, pq).tail_min(2);
  const auto gamma = exact_joint_law(2, 2, pq).floor_min_over(2);
  CHECK(std::abs(lhs - gamma.tail(1)) < 1e-12);
}

TEST_CASE("monotone coupling orders trajectories pathwise") {
  const CoopParams lo{0.6, 0.55};
  const CoopParams hi{0.8, 0.75};
  for (int traj = 0; traj < 1000; ++traj) {
    Rng rng = derive_stream(909, 0, 0, static_cast<std::uint64_t>(traj));
    CoopState a{1, 1}, b{1, 1};
    for (int step = 0; step < 12; ++step) {
      const double u1 = rng.next_unit();
      const double u2 = rng.next_unit();
      a = CoopState{binomial_quantile(2 * (a.x + a.y), lo.q, u1),
                    binomial_quantile(2 * a.z(), lo.p, u2)};
      b = CoopState{binomial_quantile(2 * (b.x + b.y), hi.q, u1),
                    binomial_quantile(2 * b.z(), hi.p, u2)};
      CHECK(a.x <= b.x);
      CHECK(a.y <= b.y);
      if (b.x + b.y > 100000) break;
      if (a.x + a.y == 0 && b.x + b.y == 0) break;
    }
  }
}
