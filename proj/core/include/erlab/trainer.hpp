#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "erlab/distill.hpp"
#include "erlab/env.hpp"
#include "erlab/policy.hpp"
#include "erlab/scoring.hpp"

namespace erlab {

// A task plus the uid that keys its rollout streams.
struct BatchTask {
    Task task;
    std::uint64_t uid = 0;
};

struct StepOptions {
    bool freeze_gate = false;          // distill every posterior path, ignoring the gate
    bool disable_posterior_pg = false; // drop the posterior policy-gradient term
    bool baseline_pool_batch = false;  // pool the prior baseline across the whole batch
    std::optional<double> grad_clip_norm;
};

struct StepStats {
    double prior_len_mean = 0.0;
    double post_len_mean = 0.0;
    double prior_acc = 0.0;
    double post_acc = 0.0;
    double pg_loss = 0.0;
    double distill_loss = 0.0;
    double s_hat_mean = 0.0;
    double gated_frac = 0.0;
};

struct TrainConfig {
    WorldConfig world;
    HyperParams hp;
    AdamConfig adam;
    int iterations = 300;
    int tasks_per_batch = 16;
    int eval_every = 50;
    int eval_task_count = 64;
    int eval_rollouts = 4;
    std::uint64_t seed = 1;

    // Initial Stop-action weight across all value buckets. Negative values
    // start the run from a stop-averse, over-long policy, which is the
    // regime the compression dynamics are about; 0 starts uniform.
    double initial_stop_bias = -2.0;

    // Ablation switches. disable_efficiency trains with alpha = 0;
    // disable_distill trains with beta = 0; freeze_gate holds the
    // distillation gate open for every path.
    bool disable_distill = false;
    bool disable_efficiency = false;
    bool freeze_gate = false;
    bool disable_posterior_pg = false;

    // Whether the prior baseline pools same-task paths only (default) or the
    // whole batch's prior paths.
    bool baseline_pool_batch = false;

    std::optional<double> grad_clip_norm;

    void validate() const; // throws ConfigError
};

struct TrainingRow {
    int iteration = 0;
    StepStats stats;
};

struct EvalPoint {
    int iteration = 0;
    double prior_acc = 0.0;
    double prior_len = 0.0;
    double post_acc = 0.0;
    double post_len = 0.0;
};

struct TrainingLog {
    std::vector<TrainingRow> rows; // one per executed iteration
    std::vector<EvalPoint> evals;
    PolicyParams final_params;
    bool aborted_non_finite = false;
    int aborted_at_iteration = -1;
};

// One outer-loop step over a task batch: sample G prior + G posterior paths
// per task, score them, assemble the gradient, and apply one optimizer step
// on the task-averaged total gradient.
StepStats train_step(PolicyParams& params, const std::vector<BatchTask>& tasks,
                     const HyperParams& hp, std::uint64_t global_seed,
                     OptimizerState& opt_state, const StepOptions& options = {});

// Samples eval_rollouts trajectories per task under the fixed eval seed and
// reports (argmax-accuracy, mean length).
struct EvalResult {
    double accuracy = 0.0;
    double mean_length = 0.0;
};
EvalResult evaluate_policy(const PolicyParams& params, const std::vector<BatchTask>& tasks,
                           const Conditioning& cond, int eval_rollouts,
                           std::uint64_t eval_seed);

// The full training loop: per-iteration batch sampling, scoring, one
// optimizer step, logging, and interleaved evaluation. Aborts with a partial
// log if a loss turns non-finite.
TrainingLog run_training(const TrainConfig& config);

// Canonical CSV serialization of the per-iteration log (byte-stable for a
// fixed config and seed).
std::string training_log_to_csv(const TrainingLog& log);

inline constexpr const char* kTrainingCsvHeader =
    "iteration,prior_len_mean,post_len_mean,prior_acc,post_acc,pg_loss,"
    "distill_loss,s_hat_mean,gated_frac";

} // namespace erlab
