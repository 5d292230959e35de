#include "doctest.h"

#include "checks.hpp"
#include "fairmt/rewards.hpp"
#include "support.hpp"

using namespace fairmt;

namespace {

const Shape kRiver{7, 2, 20};

RewardVariant single(RewardKind kind, double r, double beta, double coefficient) {
    const Shape sh{1, 1, 1};
    const std::vector<std::vector<double>> rewards{{r}}, radii{{beta}};
    return shifted_reward(kind, sh, rewards, radii, coefficient);
}

}  // namespace

TEST_CASE("optimistic and pessimistic shifts") {
    CHECK(single(RewardKind::optimistic, 1.0, 0.5, 140.0).table(0, 0)[0] == 71.0);
    CHECK(single(RewardKind::optimistic, 0.3, 0.0, 140.0).table(0, 0)[0] == 0.3);
    CHECK(single(RewardKind::pessimistic, 0.3, 0.0, -140.0).table(0, 0)[0] == 0.3);
    CHECK(single(RewardKind::pessimistic, 0.5, 0.7 / 140.0, -140.0).table(0, 0)[0] == doctest::Approx(-0.2));
}

TEST_CASE("unvisited RiverSwim cell gets the full bonus") {
    EstimatorState est(kRiver, 2, 2, 16.0);
    const auto up = optimistic_reward(est);
    const auto low = pessimistic_reward(est);
    CHECK(up.kind() == RewardKind::optimistic);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t z = 0; z < 2; ++z) {
            CHECK(up.table(m, z)[kRiver.cell(3, 4, 1)] == 560.0);
            CHECK(low.table(m, z)[kRiver.cell(3, 4, 1)] == -560.0);
        }
}

TEST_CASE("exploration coefficient") {
    CHECK(exploration_coefficient(kRiver, 2, 0.6, 0.1) == doctest::Approx(44940.0).epsilon(1e-14));
    CHECK(exploration_coefficient(kRiver, 2, 0.6, 0.1, AlphaRule::task_squared) ==
          doctest::Approx(140.0 + 4.0 * 44800.0).epsilon(1e-14));
    CHECK(exploration_coefficient(kRiver, 1, 0.6, 0.1, AlphaRule::task_squared) ==
          exploration_coefficient(kRiver, 1, 0.6, 0.1));
    CHECK_THROWS_AS(exploration_coefficient(kRiver, 2, 0.1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(exploration_coefficient(kRiver, 2, 0.1, 0.2), std::invalid_argument);

    EstimatorState est(kRiver, 2, 2, 16.0);
    CHECK_THROWS_AS(exploration_reward(est, 0.3, 0.3), std::invalid_argument);
    CHECK(exploration_reward(est, 0.6, 0.1).table(1, 1)[0] == doctest::Approx(4.0 * 44940.0).epsilon(1e-14));
}

TEST_CASE("zero radius leaves the observed reward untouched") {
    EstimatorState est({2, 2, 2}, 1, 1, 0.0);
    Trajectory t{0, {{0, 0, 1, 1, {0.4}}, {1, 1, 0, 0, {0.9}}}};
    est.update(t);
    const auto v = reward_variants(est, 0.3, 0.0);
    for (const auto* var : {&v.optimistic, &v.pessimistic, &v.exploration}) {
        const auto tab = var->table(0, 0);
        CHECK(tab[est.shape().cell(0, 0, 1)] == 0.4);
        CHECK(tab[est.shape().cell(1, 1, 0)] == 0.9);
    }
}

TEST_CASE("cellwise sandwich and width on random estimator states") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto mdp = random_small_mdp({3, 2, 3, 2, 2}, seed);
        Rng rng(seed);
        EstimatorState est(mdp.shape, 2, 2, 1.0 + 10.0 * rng.uniform(), rng.uniform());
        const auto pi = testing::shared(testing::random_policy(mdp.shape, rng), 2);
        for (std::size_t k = 0; k < seed % 7; ++k)
            for (std::size_t z = 0; z < 2; ++z) est.update(sample_trajectory(mdp, z, pi, rng));
        const double eps = 0.05 + rng.uniform(), eps0 = 0.04 * rng.uniform();
        const auto v = reward_variants(est, eps, eps0, seed % 2 ? AlphaRule::task_squared : AlphaRule::base);
        const double width = 9.0;
        for (std::size_t m = 0; m < 2; ++m)
            for (std::size_t z = 0; z < 2; ++z) {
                const auto radii = est.radius_table(z);
                const auto r = est.reward_table(m);
                for (std::size_t c = 0; c < mdp.shape.cells(); ++c) {
                    CHECK(v.pessimistic.table(m, z)[c] <= r[c]);
                    CHECK(r[c] <= v.optimistic.table(m, z)[c]);
                    CHECK(v.optimistic.table(m, z)[c] <= v.exploration.table(m, z)[c]);
                    CHECK(v.optimistic.table(m, z)[c] - v.pessimistic.table(m, z)[c] ==
                          doctest::Approx(2.0 * width * radii[c]).epsilon(1e-12));
                }
            }
    }
}

TEST_CASE("return sandwich and gap bounds under a synthetic good event") {
    const auto rep = checks::return_sandwich(120, 11);
    CHECK(rep.cases == 360);
    CHECK(rep.optimistic_slack >= -1e-9);
    CHECK(rep.pessimistic_slack >= -1e-9);
    CHECK(rep.upper_gap_slack >= -1e-9);
    CHECK(rep.lower_gap_slack >= -1e-9);
}
