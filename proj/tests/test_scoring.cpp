#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"
#include "erlab/scoring.hpp"
#include "helpers.hpp"

using namespace erlab;

namespace {

std::vector<Trajectory> sample_paths(const PolicyParams& params, const Task& task,
                                     const Conditioning& cond, int count, std::uint64_t seed) {
    std::vector<Trajectory> paths;
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_stream_seed(seed, 0, StreamTag::PriorRollout,
                                   static_cast<std::uint64_t>(i)));
        paths.push_back(sample_trajectory(params, task, cond, rng));
    }
    return paths;
}

} // namespace

TEST_CASE("hyperparameter validation") {
    HyperParams hp;
    CHECK_NOTHROW(hp.validate());
    CHECK(hp.alpha == 0.5);
    CHECK(hp.beta == 1.0);
    CHECK(hp.eta_min == 0.5);
    CHECK(hp.eta_max == 2.0);
    CHECK(hp.group_size == 4);

    HyperParams bad = hp;
    bad.eta_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = hp;
    bad.eta_max = 0.4;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = hp;
    bad.group_size = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("prior_baseline averages path log-likelihoods") {
    const Task task = generate_task(2, default_world());

    SUBCASE("single path is its own baseline") {
        const Trajectory traj = execute(task, std::vector<OpCode>{OpCode::Stop});
        const std::vector<Trajectory> group{traj};
        CHECK(prior_baseline(group, task) == answer_log_likelihood(task, traj));
    }
    SUBCASE("two paths average exactly") {
        const Trajectory a = execute(task, std::vector<OpCode>{OpCode::Stop});
        const Trajectory b =
            execute(task, std::vector<OpCode>{OpCode::Add2, OpCode::Mul2, OpCode::Stop});
        const std::vector<Trajectory> group{a, b};
        const double expected =
            (answer_log_likelihood(task, a) + answer_log_likelihood(task, b)) / 2.0;
        CHECK(prior_baseline(group, task) == doctest::Approx(expected).epsilon(1e-15));
    }
    SUBCASE("G=4 sampled paths match an independent sum") {
        const PolicyParams params = PolicyParams::zeros(task.world);
        const std::vector<Trajectory> group =
            sample_paths(params, task, Conditioning::prior(), 4, 77);
        double expected = 0.0;
        for (const Trajectory& traj : group) expected += answer_log_likelihood(task, traj);
        expected /= 4.0;
        CHECK(prior_baseline(group, task) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("empty group is an error") {
        CHECK_THROWS_AS(prior_baseline(std::vector<Trajectory>{}, task), ConfigError);
    }
}

TEST_CASE("relative correctness filter") {
    CHECK(relative_correctness(-1.0, -2.0) == 1.0);
    CHECK(relative_correctness(-2.0, -1.0) == 0.0);
    CHECK(relative_correctness(-1.5, -1.5) == 0.0);
}

TEST_CASE("efficiency coefficient") {
    HyperParams hp;
    SUBCASE("alpha zero is flat") {
        hp.alpha = 0.0;
        CHECK(efficiency_coeff(123.0, 7.0, hp) == 1.0);
        CHECK(efficiency_coeff(1.0, 900.0, hp) == 1.0);
    }
    SUBCASE("short paths clamp at eta_max") {
        CHECK(efficiency_coeff(800.0, 200.0, hp) == 2.0);
    }
    SUBCASE("long paths decay inside the clamp") {
        CHECK(efficiency_coeff(400.0, 800.0, hp) ==
              doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
        CHECK(efficiency_coeff(400.0, 800.0, hp) == doctest::Approx(0.70711).epsilon(1e-5));
    }
    SUBCASE("very long paths clamp at eta_min") {
        CHECK(efficiency_coeff(10.0, 1000.0, hp) == hp.eta_min);
    }
    SUBCASE("monotone non-increasing in path length") {
        double last = std::numeric_limits<double>::infinity();
        for (double l_z = 1.0; l_z <= 32.0; l_z += 1.0) {
            const double eta = efficiency_coeff(8.0, l_z, hp);
            CHECK(eta <= last);
            last = eta;
        }
    }
}

TEST_CASE("utility is the exact product") {
    CHECK(utility(1.0, 2.0) == 2.0);
    CHECK(utility(0.0, 1.7) == 0.0);
    CHECK(utility(0.5, 0.70711) == doctest::Approx(0.353555).epsilon(1e-12));
}

TEST_CASE("group advantages") {
    SUBCASE("closed form for [0, 1, 2]") {
        const std::vector<double> s{0.0, 1.0, 2.0};
        const std::vector<double> a = group_advantages(s, 1e-8);
        CHECK(a[0] == doctest::Approx(-1.22474).epsilon(1e-4));
        CHECK(a[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(a[2] == doctest::Approx(1.22474).epsilon(1e-4));
    }
    SUBCASE("constant groups normalize to zero, not NaN") {
        const std::vector<double> s{3.0, 3.0, 3.0, 3.0};
        for (double a : group_advantages(s, 1e-8)) CHECK(a == 0.0);
    }
    SUBCASE("fewer than two utilities is an error") {
        CHECK_THROWS_AS(group_advantages(std::vector<double>{1.0}, 1e-8), ConfigError);
    }
    SUBCASE("shift invariance over random groups") {
        Rng rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> s(4);
            for (double& x : s) x = rng.next_range(0.0, 3.0);
            const std::vector<double> base = group_advantages(s, 1e-8);
            std::vector<double> shifted = s;
            for (double& x : shifted) x += 2.5;
            const std::vector<double> moved = group_advantages(shifted, 1e-8);
            for (std::size_t i = 0; i < base.size(); ++i) {
                CHECK(moved[i] == doctest::Approx(base[i]).epsilon(1e-9).scale(1.0));
            }
        }
    }
    SUBCASE("approximate scale equivariance at eps = 1e-8") {
        Rng rng(6);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> s(4);
            for (double& x : s) x = rng.next_range(0.1, 2.0);
            const std::vector<double> base = group_advantages(s, 1e-8);
            std::vector<double> scaled = s;
            for (double& x : scaled) x *= 7.0;
            const std::vector<double> rescaled = group_advantages(scaled, 1e-8);
            for (std::size_t i = 0; i < base.size(); ++i) {
                CHECK(rescaled[i] == doctest::Approx(base[i]).epsilon(1e-6).scale(1.0));
            }
        }
    }
}

TEST_CASE("group batch assembly") {
    const Task task = generate_task(4, default_world());
    const PolicyParams params = PolicyParams::zeros(task.world);
    const HyperParams hp;
    const std::vector<Trajectory> prior =
        sample_paths(params, task, Conditioning::prior(), 4, 21);
    const std::vector<Trajectory> post = sample_paths(
        params, task, Conditioning::posterior(task.reference_answer), 4, 22);
    const GroupBatch batch = make_group_batch(task, prior, post, hp);

    SUBCASE("l_base and baseline match direct recomputation") {
        double len = 0.0;
        double baseline = 0.0;
        for (const Trajectory& traj : prior) {
            len += traj.length;
            baseline += answer_log_likelihood(task, traj);
        }
        CHECK(batch.l_base == doctest::Approx(len / 4.0).epsilon(1e-15));
        CHECK(batch.u_prior_mean == doctest::Approx(baseline / 4.0).epsilon(1e-15));
    }
    SUBCASE("records satisfy the truncation and product invariants") {
        for (const UtilityRecord& rec : batch.records) {
            CHECK(rec.r_correct >= 0.0);
            CHECK(rec.s_hat >= 0.0);
            CHECK(rec.s_hat == rec.r_correct * rec.eta);
            if (rec.r_correct == 0.0) CHECK(rec.s_hat == 0.0);
            CHECK(rec.eta >= hp.eta_min);
            CHECK(rec.eta <= hp.eta_max);
        }
    }
    SUBCASE("advantages are centered when the spread is nonzero") {
        double mean = 0.0;
        double spread = 0.0;
        for (const UtilityRecord& rec : batch.records) {
            mean += rec.advantage;
            spread += std::abs(rec.s_hat - batch.records[0].s_hat);
        }
        mean /= static_cast<double>(batch.records.size());
        if (spread > 0.0) CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
    SUBCASE("baseline override replaces the same-task mean") {
        const GroupBatch pooled = make_group_batch(task, prior, post, hp, -1.25);
        CHECK(pooled.u_prior_mean == -1.25);
        CHECK(pooled.l_base == batch.l_base); // l_base stays same-task
    }
    SUBCASE("posterior group needs at least two paths") {
        CHECK_THROWS_AS(
            make_group_batch(task, prior, std::vector<Trajectory>{post[0]}, hp), ConfigError);
    }
}
