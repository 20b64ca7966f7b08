#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "erlab/distill.hpp"
#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"
#include "helpers.hpp"

using namespace erlab;

namespace {

// A batch with hand-set advantages so gate and weighting behavior can be
// pinned without going through the scoring pipeline.
GroupBatch fixed_batch(const Task& task, const PolicyParams& params,
                       const std::vector<double>& advantages, std::uint64_t seed) {
    GroupBatch batch;
    batch.task = task;
    const Conditioning cond = Conditioning::posterior(task.reference_answer);
    for (std::size_t i = 0; i < advantages.size(); ++i) {
        Rng rng(derive_stream_seed(seed, 0, StreamTag::PosteriorRollout, i));
        batch.posterior_paths.push_back(sample_trajectory(params, task, cond, rng));
        UtilityRecord rec;
        rec.advantage = advantages[i];
        batch.records.push_back(rec);
    }
    batch.prior_paths.push_back(batch.posterior_paths.front());
    batch.l_base = 2.0;
    batch.u_prior_mean = -1.0;
    return batch;
}

} // namespace

TEST_CASE("posterior policy gradient") {
    const Task task = generate_task(3, default_world());
    Rng rng(1);
    const PolicyParams params = test::random_params(task.world, rng, 1.0);

    SUBCASE("all-zero advantages give a zero vector") {
        const GroupBatch batch = fixed_batch(task, params, {0.0, 0.0, 0.0, 0.0}, 10);
        const GradientTerm term = pg_gradient(params, batch);
        for (double g : term.grad) CHECK(g == 0.0);
        CHECK(term.loss == 0.0);
    }
    SUBCASE("opposite advantages on identical trajectories cancel") {
        GroupBatch batch = fixed_batch(task, params, {1.0, -1.0}, 11);
        batch.posterior_paths[1] = batch.posterior_paths[0];
        const GradientTerm term = pg_gradient(params, batch);
        for (double g : term.grad) CHECK(g == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    }
    SUBCASE("matches finite differences with advantages frozen") {
        for (int trial = 0; trial < 10; ++trial) {
            Rng trial_rng(100 + trial);
            const Task t = generate_task(200 + trial, default_world());
            const PolicyParams p = test::random_params(t.world, trial_rng, 1.5);
            const GroupBatch batch =
                fixed_batch(t, p, {0.9, -0.3, 1.4, -2.0}, 300 + trial);
            const GradientTerm term = pg_gradient(p, batch);
            const Conditioning cond = Conditioning::posterior(t.reference_answer);
            const auto loss_fn = [&](const PolicyParams& probe) {
                double loss = 0.0;
                for (std::size_t i = 0; i < batch.posterior_paths.size(); ++i) {
                    loss -= batch.records[i].advantage *
                            log_prob(probe, t, batch.posterior_paths[i], cond);
                }
                return loss / static_cast<double>(batch.posterior_paths.size());
            };
            CHECK(relative_vector_error(term.grad, test::fd_gradient(loss_fn, p)) < 1e-6);
            CHECK(term.loss == doctest::Approx(loss_fn(p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("advantage-gated distillation gradient") {
    const Task task = generate_task(4, default_world());
    Rng rng(2);
    const PolicyParams params = test::random_params(task.world, rng, 1.0);

    SUBCASE("an empty gate yields the zero vector") {
        const GroupBatch batch = fixed_batch(task, params, {0.0, -0.5, -2.0}, 20);
        const GradientTerm term = distill_gradient(params, batch);
        for (double g : term.grad) CHECK(g == 0.0);
        CHECK(term.loss == 0.0);
    }
    SUBCASE("a single gated path reduces to one prior score gradient") {
        const GroupBatch batch = fixed_batch(task, params, {1.0, -1.0}, 21);
        const GradientTerm term = distill_gradient(params, batch);
        const std::vector<double> expected =
            grad_log_prob(params, task, batch.posterior_paths[0], Conditioning::prior());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(term.grad[i] == doctest::Approx(-expected[i] / 2.0).epsilon(1e-15).scale(1.0));
        }
    }
    SUBCASE("matches finite differences with the q term held fixed") {
        for (int trial = 0; trial < 10; ++trial) {
            Rng trial_rng(400 + trial);
            const Task t = generate_task(500 + trial, default_world());
            const PolicyParams p = test::random_params(t.world, trial_rng, 1.5);
            const GroupBatch batch = fixed_batch(t, p, {1.1, 0.0, -0.7, 0.4}, 600 + trial);
            const GradientTerm term = distill_gradient(p, batch);
            const auto loss_fn = [&](const PolicyParams& probe) {
                double loss = 0.0;
                for (std::size_t i = 0; i < batch.posterior_paths.size(); ++i) {
                    if (!(batch.records[i].advantage > 0.0)) continue;
                    loss -= log_prob(probe, t, batch.posterior_paths[i], Conditioning::prior());
                }
                return loss / static_cast<double>(batch.posterior_paths.size());
            };
            CHECK(relative_vector_error(term.grad, test::fd_gradient(loss_fn, p)) < 1e-6);
        }
    }
    SUBCASE("stop-gradient: the goal block is identically zero") {
        const GroupBatch batch = fixed_batch(task, params, {2.0, 1.0, 0.5, 1.5}, 22);
        const GradientTerm term = distill_gradient(params, batch);
        for (std::size_t i = params.layout.base_dim(); i < term.grad.size(); ++i) {
            CHECK(term.grad[i] == 0.0);
        }
    }
    SUBCASE("perturbing goal weights cannot move the distill gradient") {
        const GroupBatch batch = fixed_batch(task, params, {1.0, -0.2, 0.8, 0.0}, 23);
        const GradientTerm before = distill_gradient(params, batch);
        PolicyParams perturbed = params;
        for (std::size_t i = perturbed.layout.base_dim(); i < perturbed.weights.size(); ++i) {
            perturbed.weights[i] += 0.9;
        }
        const GradientTerm after = distill_gradient(perturbed, batch);
        CHECK(after.grad == before.grad);
    }
    SUBCASE("adding an A <= 0 path only rescales by 1/G") {
        GroupBatch small = fixed_batch(task, params, {1.0, 0.6, -0.4}, 24);
        GroupBatch padded = small;
        padded.posterior_paths.push_back(padded.posterior_paths[0]);
        UtilityRecord rec;
        rec.advantage = 0.0;
        padded.records.push_back(rec);
        const GradientTerm g_small = distill_gradient(params, small);
        const GradientTerm g_padded = distill_gradient(params, padded);
        for (std::size_t i = 0; i < g_small.grad.size(); ++i) {
            CHECK(3.0 * g_small.grad[i] ==
                  doctest::Approx(4.0 * g_padded.grad[i]).epsilon(1e-12).scale(1.0));
        }
    }
    SUBCASE("a frozen-open gate distills every path") {
        const GroupBatch batch = fixed_batch(task, params, {-1.0, -2.0}, 25);
        const GradientTerm gated = distill_gradient(params, batch, false);
        const GradientTerm open = distill_gradient(params, batch, true);
        for (double g : gated.grad) CHECK(g == 0.0);
        CHECK(l2_norm(open.grad) > 0.0);
    }
}

TEST_CASE("total gradient assembly") {
    GradientTerm pg{{1.0, 0.0}, 0.25};
    GradientTerm distill{{0.0, 1.0}, -0.5};

    SUBCASE("beta zero drops distillation") {
        const GradientBundle bundle = total_gradient(pg, distill, 0.0);
        CHECK(bundle.total_grad == pg.grad);
        CHECK(bundle.total_loss == pg.loss);
    }
    SUBCASE("beta one adds componentwise") {
        const GradientBundle bundle = total_gradient(pg, distill, 1.0);
        CHECK(bundle.total_grad == std::vector<double>{1.0, 1.0});
    }
    SUBCASE("beta two scales the distill part") {
        const GradientBundle bundle = total_gradient(pg, distill, 2.0);
        CHECK(bundle.total_grad == std::vector<double>{1.0, 2.0});
        CHECK(bundle.pg_loss == 0.25);
        CHECK(bundle.distill_loss == -0.5);
        CHECK(bundle.total_loss == 0.25 + 2.0 * -0.5);
    }
    SUBCASE("linear in beta") {
        for (double beta : {0.0, 0.3, 1.7, 4.0}) {
            const GradientBundle bundle = total_gradient(pg, distill, beta);
            for (std::size_t i = 0; i < bundle.total_grad.size(); ++i) {
                CHECK(bundle.total_grad[i] == pg.grad[i] + beta * distill.grad[i]);
            }
        }
    }
    SUBCASE("dimension mismatch is rejected") {
        GradientTerm bad{{1.0}, 0.0};
        CHECK_THROWS_AS(total_gradient(pg, bad, 1.0), ConfigError);
    }
}

TEST_CASE("adamw optimizer") {
    const WorldConfig world = default_world();

    SUBCASE("zero gradient and zero decay leave weights untouched") {
        Rng rng(9);
        PolicyParams params = test::random_params(world, rng, 1.0);
        const std::vector<double> before = params.weights;
        OptimizerState state = OptimizerState::init(params.weights.size());
        const std::vector<double> grad(params.weights.size(), 0.0);
        optimizer_step(params, grad, state, 0.05);
        CHECK(params.weights == before);
    }
    SUBCASE("first step moves against the gradient sign") {
        PolicyParams params = PolicyParams::zeros(world);
        OptimizerState state = OptimizerState::init(params.weights.size());
        std::vector<double> grad(params.weights.size(), 0.0);
        grad[0] = 2.5;
        grad[1] = -0.3;
        optimizer_step(params, grad, state, 0.05);
        CHECK(params.weights[0] < 0.0);
        CHECK(params.weights[1] > 0.0);
        CHECK(params.weights[2] == 0.0);
        // bias-corrected first step is lr * g / (|g| + eps)
        CHECK(params.weights[0] == doctest::Approx(-0.05).epsilon(1e-6));
    }
    SUBCASE("converges on the toy quadratic") {
        // 0.5 * ||theta - target||^2, analytic minimum at target
        PolicyParams params = PolicyParams::zeros(world);
        std::vector<double> target(params.weights.size(), 0.0);
        target[0] = 0.2;
        target[1] = -0.15;
        target[2] = 0.1;
        OptimizerState state = OptimizerState::init(params.weights.size());
        std::vector<double> grad(params.weights.size());
        for (int step = 0; step < 100; ++step) {
            for (std::size_t i = 0; i < grad.size(); ++i) {
                grad[i] = params.weights[i] - target[i];
            }
            optimizer_step(params, grad, state, 0.05);
        }
        for (std::size_t i = 0; i < grad.size(); ++i) {
            CHECK(std::abs(params.weights[i] - target[i]) < 1e-3);
        }
    }
    SUBCASE("decoupled weight decay shrinks weights with zero gradient") {
        PolicyParams params = PolicyParams::zeros(world);
        params.weights[0] = 1.0;
        AdamConfig adam;
        adam.weight_decay = 0.1;
        OptimizerState state = OptimizerState::init(params.weights.size(), adam);
        const std::vector<double> grad(params.weights.size(), 0.0);
        optimizer_step(params, grad, state, 0.05);
        CHECK(params.weights[0] == doctest::Approx(1.0 - 0.05 * 0.1).epsilon(1e-12));
    }
    SUBCASE("gradient clipping caps the applied norm") {
        PolicyParams params = PolicyParams::zeros(world);
        OptimizerState state = OptimizerState::init(params.weights.size());
        std::vector<double> grad(params.weights.size(), 0.0);
        grad[0] = 100.0;
        PolicyParams clipped = params;
        OptimizerState clipped_state = OptimizerState::init(params.weights.size());
        optimizer_step(params, grad, state, 0.05);
        optimizer_step(clipped, grad, clipped_state, 0.05, 1.0);
        // Adam normalizes scale out on the first step, so compare moments
        CHECK(clipped_state.first_moment[0] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(state.first_moment[0] == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("non-finite gradients abort with a diagnostic") {
        PolicyParams params = PolicyParams::zeros(world);
        OptimizerState state = OptimizerState::init(params.weights.size());
        std::vector<double> grad(params.weights.size(), 0.0);
        grad[3] = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(optimizer_step(params, grad, state, 0.05), NumericError);
    }
}
