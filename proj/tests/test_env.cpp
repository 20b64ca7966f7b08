#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "erlab/env.hpp"
#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"
#include "helpers.hpp"

using namespace erlab;

TEST_CASE("world config validation") {
    WorldConfig world = default_world();
    CHECK_NOTHROW(world.validate());

    WorldConfig no_stop = world;
    no_stop.op_set = {OpCode::Add1, OpCode::Add2};
    CHECK_THROWS_AS(no_stop.validate(), ConfigError);

    WorldConfig empty_grid = world;
    empty_grid.answer_grid.clear();
    CHECK_THROWS_AS(empty_grid.validate(), ConfigError);

    WorldConfig dup_grid = world;
    dup_grid.answer_grid = {1, 2, 2};
    CHECK_THROWS_AS(dup_grid.validate(), ConfigError);

    WorldConfig bad_steps = world;
    bad_steps.max_steps = 0;
    CHECK_THROWS_AS(bad_steps.validate(), ConfigError);

    WorldConfig bad_kappa = world;
    bad_kappa.kappa = 0.0;
    CHECK_THROWS_AS(bad_kappa.validate(), ConfigError);
}

TEST_CASE("generate_task is deterministic in the seed") {
    const WorldConfig world = default_world();
    const Task a = generate_task(0, world);
    const Task b = generate_task(0, world);
    CHECK(a.start_value == b.start_value);
    CHECK(a.reference_answer == b.reference_answer);
    const Task c = generate_task(1, world);
    const Task d = generate_task(2, world);
    // not a guarantee, but the default world has enough variety that two
    // different seeds colliding on both fields would be suspicious
    CHECK((a.start_value != c.start_value || a.reference_answer != c.reference_answer ||
           c.start_value != d.start_value || c.reference_answer != d.reference_answer));
}

TEST_CASE("degenerate world forces the only reachable answer") {
    WorldConfig world;
    world.start_min = 7;
    world.start_max = 7;
    world.answer_grid = {7};
    world.op_set = {OpCode::Stop};
    world.max_steps = 1;
    world.kappa = 1.0;
    const Task task = generate_task(42, world);
    CHECK(task.start_value == 7);
    CHECK(task.reference_answer == 7);
}

TEST_CASE("generation fails when no grid answer is reachable") {
    WorldConfig world;
    world.start_min = 0;
    world.start_max = 0;
    world.answer_grid = {100}; // unreachable within 2 steps of +1
    world.op_set = {OpCode::Add1, OpCode::Stop};
    world.max_steps = 2;
    world.kappa = 1.0;
    CHECK_THROWS_AS(generate_task(0, world), GenerationError);
}

TEST_CASE("generated tasks pass a brute-force reachability re-check") {
    const WorldConfig world = default_world();
    const auto sequences = test::all_action_sequences(world);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Task task = generate_task(seed, world);
        REQUIRE(std::count(world.answer_grid.begin(), world.answer_grid.end(),
                           task.reference_answer) == 1);
        bool reachable = false;
        for (const auto& actions : sequences) {
            if (execute(task, actions).final_value == task.reference_answer) {
                reachable = true;
                break;
            }
        }
        REQUIRE(reachable);
    }
}

TEST_CASE("execute folds ops and respects STOP") {
    const WorldConfig world = default_world();

    SUBCASE("arithmetic") {
        const Task task{3, 0, world};
        const Trajectory traj =
            execute(task, std::vector<OpCode>{OpCode::Add1, OpCode::Mul2, OpCode::Stop});
        CHECK(traj.final_value == 8);
        CHECK(traj.length == 2);
    }
    SUBCASE("immediate stop gets the length floor") {
        const Task task{5, 0, world};
        const Trajectory traj = execute(task, std::vector<OpCode>{OpCode::Stop});
        CHECK(traj.final_value == 5);
        CHECK(traj.length == 1);
    }
    SUBCASE("full-length trajectory without STOP") {
        WorldConfig short_world = world;
        short_world.max_steps = 3;
        const Task task{0, 0, short_world};
        const Trajectory traj =
            execute(task, std::vector<OpCode>{OpCode::Add2, OpCode::Add2, OpCode::Add2});
        CHECK(traj.final_value == 6);
        CHECK(traj.length == 3);
    }
    SUBCASE("action outside op_set") {
        const Task task{0, 0, world}; // default op_set has no -1
        CHECK_THROWS_AS(execute(task, std::vector<OpCode>{OpCode::Sub1, OpCode::Stop}),
                        std::invalid_argument);
    }
    SUBCASE("too many actions") {
        const Task task{0, 0, world};
        CHECK_THROWS_AS(
            execute(task, std::vector<OpCode>(5, OpCode::Add1)), std::invalid_argument);
    }
    SUBCASE("STOP before the end") {
        const Task task{0, 0, world};
        CHECK_THROWS_AS(
            execute(task, std::vector<OpCode>{OpCode::Stop, OpCode::Add1}),
            std::invalid_argument);
    }
}

TEST_CASE("execute is pure") {
    const WorldConfig world = default_world();
    const Task task = generate_task(9, world);
    const std::vector<OpCode> actions{OpCode::Add2, OpCode::Mul2, OpCode::Stop};
    const Trajectory a = execute(task, actions);
    const Trajectory b = execute(task, actions);
    CHECK(a == b);
    CHECK(answer_log_likelihood(task, a) == answer_log_likelihood(task, b));
}

TEST_CASE("execution saturates instead of overflowing") {
    WorldConfig world = default_world();
    world.start_min = -kValueSaturation;
    world.start_max = kValueSaturation;
    const Task task{999'999, 0, world};
    const Trajectory traj =
        execute(task, std::vector<OpCode>{OpCode::Mul2, OpCode::Mul2, OpCode::Stop});
    CHECK(traj.final_value == kValueSaturation);
}

TEST_CASE("answer head log-likelihood") {
    WorldConfig world = default_world();
    world.answer_grid = {0, 1, 2, 3, 4};
    world.kappa = 1.0;

    SUBCASE("size-one grid is certain") {
        WorldConfig tiny = world;
        tiny.answer_grid = {3};
        const Task task{3, 3, tiny};
        const Trajectory traj = execute(task, std::vector<OpCode>{OpCode::Stop});
        CHECK(answer_log_likelihood(task, traj) == 0.0);
    }
    SUBCASE("hand-summed softmax over the 5-point grid") {
        // final value 2 sits mid-grid: distances 2,1,0,1,2
        const double expected = -std::log(1.0 + 2.0 * std::exp(-1.0) + 2.0 * std::exp(-2.0));
        CHECK(answer_log_likelihood_at(world, 2, 2) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(answer_log_likelihood_at(world, 2, 2) == doctest::Approx(-0.6964).epsilon(1e-4));
    }
    SUBCASE("distance symmetry") {
        CHECK(answer_log_likelihood_at(world, 2, 1) ==
              doctest::Approx(answer_log_likelihood_at(world, 2, 3)).epsilon(1e-15));
    }
}

TEST_CASE("answer head normalizes over the grid") {
    const WorldConfig world = default_world();
    for (int final_value : {-3, 0, 4, 11, 20, 35}) {
        CompensatedSum total;
        for (int y : world.answer_grid) {
            total.add(std::exp(answer_log_likelihood_at(world, final_value, y)));
        }
        CHECK(total.value() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("likelihood peaks at the grid point nearest the executed value") {
    const WorldConfig world = default_world();
    for (int final_value : {-2, 0, 7, 20, 50}) {
        const int best = argmax_answer(world, final_value);
        const double best_ll = answer_log_likelihood_at(world, final_value, best);
        for (int y : world.answer_grid) {
            CHECK(answer_log_likelihood_at(world, final_value, y) <= best_ll + 1e-15);
        }
    }
}

TEST_CASE("reachable_values agrees with brute force on the default world") {
    const WorldConfig world = default_world();
    for (int start : {0, 3, 9}) {
        const Task task{start, world.answer_grid.front(), world};
        std::set<int> brute;
        for (const auto& actions : test::all_action_sequences(world)) {
            brute.insert(execute(task, actions).final_value);
        }
        const std::vector<int> via_bfs = reachable_values(world, start);
        CHECK(std::set<int>(via_bfs.begin(), via_bfs.end()) == brute);
    }
}
