#include "doctest.h"

#include <filesystem>
#include <string>

#include "fairmt/environments.hpp"
#include "fairmt/evaluation.hpp"
#include "support.hpp"

using namespace fairmt;

namespace {

constexpr std::size_t kLeft = RiverSwimSpec::left, kRight = RiverSwimSpec::right;

double true_return(const TaskedGroupMDP& mdp, std::size_t z, std::size_t m, const TimedPolicy& pi) {
    const auto& g = mdp.groups[z];
    return evaluate_return(pi, g.initial_dist, g.transition, mdp.rewards[m]);
}

}  // namespace

TEST_CASE("RiverSwim transition rows") {
    const auto mdp = testing::riverswim();
    const Shape& sh = mdp.shape;
    CHECK(sh == Shape{7, 2, 20});
    CHECK(mdp.n_tasks == 2);
    CHECK(mdp.n_groups() == 2);
    CHECK(validate_mdp(mdp).empty());

    const auto& a = mdp.groups[0].transition;
    const auto& b = mdp.groups[1].transition;
    // interior right swim
    CHECK(a[sh.row(5, 2, kRight) + 3] == 0.6);
    CHECK(a[sh.row(5, 2, kRight) + 2] == 0.3);
    CHECK(a[sh.row(5, 2, kRight) + 1] == 0.1);
    CHECK(b[sh.row(5, 2, kRight) + 3] == 0.5);
    CHECK(b[sh.row(5, 2, kRight) + 1] == 0.15);
    // blocked moves fold into staying
    CHECK(a[sh.row(0, 0, kRight) + 0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(a[sh.row(0, 0, kRight) + 1] == 0.6);
    CHECK(a[sh.row(0, 6, kRight) + 6] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(a[sh.row(0, 6, kRight) + 5] == 0.1);
    // left is deterministic
    CHECK(a[sh.row(3, 4, kLeft) + 3] == 1.0);
    CHECK(b[sh.row(3, 0, kLeft) + 0] == 1.0);
    CHECK(mdp.groups[0].initial_dist == std::vector<double>{1, 0, 0, 0, 0, 0, 0});

    // rewards: task 0 only at the far end, task 1 from state 3 on
    for (std::size_t s = 0; s < 7; ++s) {
        CHECK(mdp.rewards[0][sh.cell(4, s, kRight)] == (s == 6 ? 1.0 : 0.0));
        CHECK(mdp.rewards[1][sh.cell(4, s, kRight)] == (s >= 3 ? 1.0 : 0.0));
        CHECK(mdp.rewards[0][sh.cell(4, s, kLeft)] == 0.0);
        CHECK(mdp.rewards[1][sh.cell(4, s, kLeft)] == 0.0);
    }
}

TEST_CASE("always-left earns nothing") {
    const auto mdp = testing::riverswim();
    const auto left = TimedPolicy::constant_action(mdp.shape, kLeft);
    for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t m = 0; m < 2; ++m) CHECK(true_return(mdp, z, m, left) == 0.0);
}

TEST_CASE("a sure rightward swim reaches the end after six steps") {
    RiverSwimSpec spec;
    spec.groups = {{1.0, 0.0, 0.0, 0}};
    const auto mdp = build_riverswim_multitask(spec);
    const auto right = TimedPolicy::constant_action(mdp.shape, kRight);
    CHECK(true_return(mdp, 0, 0, right) == 14.0);  // H - 6
    CHECK(true_return(mdp, 0, 1, right) == 17.0);  // H - 3
}

TEST_CASE("identical groups have zero gaps under any shared policy") {
    RiverSwimSpec spec;
    spec.groups = {{0.6, 0.3, 0.1, 0}, {0.6, 0.3, 0.1, 0}};
    const auto mdp = build_riverswim_multitask(spec);
    Rng rng(12);
    for (int i = 0; i < 5; ++i)
        CHECK(fairness_gaps(mdp, testing::shared(testing::random_policy(mdp.shape, rng), 2)).max_gap == 0.0);
}

TEST_CASE("group asymmetry shows up as a gap under always-right") {
    const auto mdp = testing::riverswim();
    const auto right = TimedPolicy::constant_action(mdp.shape, kRight);
    for (std::size_t m = 0; m < 2; ++m) CHECK(true_return(mdp, 0, m, right) > true_return(mdp, 1, m, right) + 0.1);
    // the wider reward region pays at least as much
    for (std::size_t z = 0; z < 2; ++z) CHECK(true_return(mdp, z, 1, right) >= true_return(mdp, z, 0, right));
}

TEST_CASE("invalid RiverSwim specs are rejected") {
    RiverSwimSpec spec;
    spec.groups = {{0.6, 0.3, 0.0, 0}};
    CHECK_THROWS_AS(build_riverswim_multitask(spec), std::invalid_argument);
    spec.groups = {{1.2, -0.2, 0.0, 0}};
    CHECK_THROWS_AS(build_riverswim_multitask(spec), std::invalid_argument);
    spec.groups = {{0.6, 0.3, 0.1, 7}};
    CHECK_THROWS_AS(build_riverswim_multitask(spec), std::invalid_argument);
    spec.groups.clear();
    CHECK_THROWS_AS(build_riverswim_multitask(spec), std::invalid_argument);
}

TEST_CASE("random instances are deterministic, valid and bounded") {
    CHECK(random_small_mdp({3, 2, 4, 2, 2}, 7) == random_small_mdp({3, 2, 4, 2, 2}, 7));
    CHECK_FALSE(random_small_mdp({3, 2, 4, 2, 2}, 7) == random_small_mdp({3, 2, 4, 2, 2}, 8));
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const RandomMdpDims dims{2 + seed % 3, 1 + seed % 2, 1 + seed % 4, 1 + seed % 2, 1 + seed % 3};
        const auto mdp = random_small_mdp(dims, seed);
        REQUIRE(validate_mdp(mdp).empty());
        CHECK(mdp.n_tasks == dims.n_tasks);
        CHECK(mdp.n_groups() == dims.n_groups);
        Rng rng(seed);
        const auto pi = testing::random_policy(mdp.shape, rng);
        for (std::size_t z = 0; z < mdp.n_groups(); ++z)
            for (std::size_t m = 0; m < mdp.n_tasks; ++m) {
                const double j = true_return(mdp, z, m, pi);
                CHECK(j >= 0.0);
                CHECK(j <= double(dims.horizon) + 1e-12);
            }
    }
}

TEST_CASE("full-table config round trip") {
    const auto mdp = random_small_mdp({3, 2, 2, 2, 2}, 31);
    const std::string text = serialize_env_config(mdp);
    CHECK(parse_env_config(text) == mdp);
    CHECK(serialize_env_config(parse_env_config(text)) == text);

    const auto river = testing::riverswim();
    CHECK(parse_env_config(serialize_env_config(river)) == river);
    CHECK(parse_env_config(serialize_riverswim_config(RiverSwimSpec{})) == river);

    const auto path = std::filesystem::temp_directory_path() / "fairmt_env_roundtrip.json";
    save_env_config(mdp, path);
    CHECK(load_env_config(path) == mdp);
    std::filesystem::remove(path);
}

TEST_CASE("stationary tables are replicated over the horizon") {
    const std::string text = R"({
        "format_version": 1, "n_states": 2, "n_actions": 1, "horizon": 3,
        "tasks": [{"stationary_rewards": [[0.5], [1.0]]}],
        "groups": [{"initial_dist": [1, 0], "stationary_transition": [[[0.25, 0.75]], [[0, 1]]]}]
    })";
    const auto mdp = parse_env_config(text);
    CHECK(mdp.shape == Shape{2, 1, 3});
    for (std::size_t h = 0; h < 3; ++h) {
        CHECK(mdp.rewards[0][mdp.shape.cell(h, 1, 0)] == 1.0);
        CHECK(mdp.groups[0].transition[mdp.shape.row(h, 0, 0) + 1] == 0.75);
    }
}

TEST_CASE("config errors") {
    const auto bad = [](const std::string& text) { CHECK_THROWS_AS(parse_env_config(text), ConfigError); };
    const std::string body = R"("n_states": 2, "n_actions": 1, "horizon": 1,
        "tasks": [{"stationary_rewards": [[0.5], [1.0]]}],
        "groups": [{"initial_dist": [1, 0], "stationary_transition": [[[0.1, 0.8]], [[0, 1]]]}])";
    // the 0.9 row fails validation
    bad("{\"format_version\": 1, " + body + "}");
    try {
        parse_env_config("{\"format_version\": 1, " + body + "}");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("transition") != std::string::npos);
    }
    bad("{\"format_version\": 2, " + body + "}");
    try {
        parse_env_config("{\"format_version\": 2, " + body + "}");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("format_version") != std::string::npos);
    }
    bad("{\"format_version\": 1, ");
    bad(R"({"format_version": 1, "generator": "lake"})");
    bad(R"({"format_version": 1, "generator": "riverswim", "horizon": 0, "groups": []})");
    bad(R"({"format_version": 1, "n_states": 2, "n_actions": 1, "horizon": 1, "tasks": [{"stationary_rewards": [[0.5]]}],
            "groups": [{"initial_dist": [1, 0], "stationary_transition": [[[0, 1]], [[0, 1]]]}]})");
    CHECK_THROWS_AS(load_env_config("/nonexistent/env.json"), ConfigError);
}
