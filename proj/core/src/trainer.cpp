#include "erlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"

namespace erlab {

void TrainConfig::validate() const {
    world.validate();
    hp.validate();
    adam.validate();
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (tasks_per_batch < 1) throw ConfigError("tasks_per_batch must be >= 1");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (eval_task_count < 1) throw ConfigError("eval_task_count must be >= 1");
    if (eval_rollouts < 1) throw ConfigError("eval_rollouts must be >= 1");
    if (grad_clip_norm && !(*grad_clip_norm > 0.0)) {
        throw ConfigError("grad_clip_norm must be > 0 when set");
    }
    if (!std::isfinite(initial_stop_bias)) {
        throw ConfigError("initial_stop_bias must be finite");
    }
}

namespace {

// Every value bucket's Stop weight gets the bias; both streams share it.
PolicyParams initial_params(const WorldConfig& world, double stop_bias) {
    PolicyParams params = PolicyParams::zeros(world);
    const auto it = std::find(world.op_set.begin(), world.op_set.end(), OpCode::Stop);
    const auto stop_idx = static_cast<std::size_t>(it - world.op_set.begin());
    for (std::size_t bucket = 0; bucket < params.layout.value_buckets; ++bucket) {
        params.weights[bucket * params.layout.op_count + stop_idx] = stop_bias;
    }
    return params;
}

std::vector<Trajectory> sample_group(const PolicyParams& params, const BatchTask& bt,
                                     const Conditioning& cond, StreamTag tag, int group_size,
                                     std::uint64_t global_seed) {
    std::vector<Trajectory> paths;
    paths.reserve(static_cast<std::size_t>(group_size));
    for (int j = 0; j < group_size; ++j) {
        Rng rng(derive_stream_seed(global_seed, bt.uid, tag, static_cast<std::uint64_t>(j)));
        paths.push_back(sample_trajectory(params, bt.task, cond, rng));
    }
    return paths;
}

bool is_hit(const Task& task, const Trajectory& traj) {
    return argmax_answer(task.world, traj.final_value) == task.reference_answer;
}

} // namespace

StepStats train_step(PolicyParams& params, const std::vector<BatchTask>& tasks,
                     const HyperParams& hp, std::uint64_t global_seed,
                     OptimizerState& opt_state, const StepOptions& options) {
    if (tasks.empty()) throw ConfigError("train_step: empty task batch");

    // Phase 1: dual-stream generation for every task.
    std::vector<std::vector<Trajectory>> prior_groups, posterior_groups;
    prior_groups.reserve(tasks.size());
    posterior_groups.reserve(tasks.size());
    for (const BatchTask& bt : tasks) {
        prior_groups.push_back(sample_group(params, bt, Conditioning::prior(),
                                            StreamTag::PriorRollout, hp.group_size,
                                            global_seed));
        posterior_groups.push_back(
            sample_group(params, bt, Conditioning::posterior(bt.task.reference_answer),
                         StreamTag::PosteriorRollout, hp.group_size, global_seed));
    }

    std::optional<double> pooled_baseline;
    if (options.baseline_pool_batch) {
        CompensatedSum sum;
        long count = 0;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            for (const Trajectory& traj : prior_groups[t]) {
                sum.add(answer_log_likelihood(tasks[t].task, traj));
                ++count;
            }
        }
        pooled_baseline = sum.value() / static_cast<double>(count);
    }

    // Phases 2 and 3: score, assemble gradients, average across tasks.
    const auto dim = params.layout.dim();
    std::vector<double> batch_grad(dim, 0.0);
    CompensatedSum pg_loss_sum, distill_loss_sum;
    CompensatedSum prior_len, post_len, prior_hits, post_hits, s_hat_sum, gated;
    long prior_paths_total = 0;
    long post_paths_total = 0;

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const Task& task = tasks[t].task;
        for (const Trajectory& traj : prior_groups[t]) {
            prior_len.add(traj.length);
            prior_hits.add(is_hit(task, traj) ? 1.0 : 0.0);
            ++prior_paths_total;
        }
        for (const Trajectory& traj : posterior_groups[t]) {
            post_len.add(traj.length);
            post_hits.add(is_hit(task, traj) ? 1.0 : 0.0);
            ++post_paths_total;
        }

        GroupBatch batch = make_group_batch(task, std::move(prior_groups[t]),
                                            std::move(posterior_groups[t]), hp,
                                            pooled_baseline);
        for (const UtilityRecord& rec : batch.records) {
            s_hat_sum.add(rec.s_hat);
            const bool is_gated = options.freeze_gate || rec.advantage > 0.0;
            gated.add(is_gated ? 1.0 : 0.0);
        }

        GradientTerm pg;
        if (options.disable_posterior_pg) {
            pg.grad.assign(dim, 0.0);
        } else {
            pg = pg_gradient(params, batch);
        }
        const GradientTerm distill = distill_gradient(params, batch, options.freeze_gate);
        const GradientBundle bundle = total_gradient(pg, distill, hp.beta);

        const double task_weight = 1.0 / static_cast<double>(tasks.size());
        for (std::size_t i = 0; i < dim; ++i) {
            batch_grad[i] += task_weight * bundle.total_grad[i];
        }
        pg_loss_sum.add(bundle.pg_loss);
        distill_loss_sum.add(bundle.distill_loss);
    }

    StepStats stats;
    stats.prior_len_mean = prior_len.value() / static_cast<double>(prior_paths_total);
    stats.post_len_mean = post_len.value() / static_cast<double>(post_paths_total);
    stats.prior_acc = prior_hits.value() / static_cast<double>(prior_paths_total);
    stats.post_acc = post_hits.value() / static_cast<double>(post_paths_total);
    stats.pg_loss = pg_loss_sum.value() / static_cast<double>(tasks.size());
    stats.distill_loss = distill_loss_sum.value() / static_cast<double>(tasks.size());
    stats.s_hat_mean = s_hat_sum.value() / static_cast<double>(post_paths_total);
    stats.gated_frac = gated.value() / static_cast<double>(post_paths_total);

    if (!std::isfinite(stats.pg_loss) || !std::isfinite(stats.distill_loss)) {
        throw NumericError("train_step: non-finite loss");
    }
    optimizer_step(params, batch_grad, opt_state, hp.learning_rate, options.grad_clip_norm);
    return stats;
}

EvalResult evaluate_policy(const PolicyParams& params, const std::vector<BatchTask>& tasks,
                           const Conditioning& cond, int eval_rollouts,
                           std::uint64_t eval_seed) {
    if (tasks.empty()) throw ConfigError("evaluate_policy: empty task set");
    if (eval_rollouts < 1) throw ConfigError("evaluate_policy: eval_rollouts must be >= 1");
    CompensatedSum hits, lengths;
    long samples = 0;
    for (const BatchTask& bt : tasks) {
        const Conditioning task_cond = cond.is_posterior()
                                           ? Conditioning::posterior(bt.task.reference_answer)
                                           : cond;
        for (int r = 0; r < eval_rollouts; ++r) {
            Rng rng(derive_stream_seed(eval_seed, bt.uid, StreamTag::EvalRollout,
                                       static_cast<std::uint64_t>(r)));
            const Trajectory traj = sample_trajectory(params, bt.task, task_cond, rng);
            hits.add(is_hit(bt.task, traj) ? 1.0 : 0.0);
            lengths.add(traj.length);
            ++samples;
        }
    }
    EvalResult result;
    result.accuracy = hits.value() / static_cast<double>(samples);
    result.mean_length = lengths.value() / static_cast<double>(samples);
    return result;
}

TrainingLog run_training(const TrainConfig& config) {
    config.validate();

    HyperParams hp = config.hp;
    if (config.disable_efficiency) hp.alpha = 0.0;
    if (config.disable_distill) hp.beta = 0.0;

    StepOptions options;
    options.freeze_gate = config.freeze_gate;
    options.disable_posterior_pg = config.disable_posterior_pg;
    options.baseline_pool_batch = config.baseline_pool_batch;
    options.grad_clip_norm = config.grad_clip_norm;

    TrainingLog log;
    PolicyParams params = initial_params(config.world, config.initial_stop_bias);
    OptimizerState opt_state = OptimizerState::init(params.layout.dim(), config.adam);

    std::vector<BatchTask> eval_tasks;
    eval_tasks.reserve(static_cast<std::size_t>(config.eval_task_count));
    for (int i = 0; i < config.eval_task_count; ++i) {
        const std::uint64_t task_seed = derive_stream_seed(
            config.seed, 0, StreamTag::EvalTaskGen, static_cast<std::uint64_t>(i));
        eval_tasks.push_back(BatchTask{generate_task(task_seed, config.world), task_seed});
    }

    for (int iteration = 0; iteration < config.iterations; ++iteration) {
        std::vector<BatchTask> batch;
        batch.reserve(static_cast<std::size_t>(config.tasks_per_batch));
        for (int j = 0; j < config.tasks_per_batch; ++j) {
            const std::uint64_t task_seed =
                derive_stream_seed(config.seed, static_cast<std::uint64_t>(iteration),
                                   StreamTag::TaskGen, static_cast<std::uint64_t>(j));
            batch.push_back(BatchTask{generate_task(task_seed, config.world), task_seed});
        }

        StepStats stats;
        try {
            stats = train_step(params, batch, hp, config.seed, opt_state, options);
        } catch (const NumericError&) {
            log.aborted_non_finite = true;
            log.aborted_at_iteration = iteration;
            break;
        }
        log.rows.push_back(TrainingRow{iteration, stats});

        if ((iteration + 1) % config.eval_every == 0 || iteration + 1 == config.iterations) {
            const EvalResult prior = evaluate_policy(params, eval_tasks, Conditioning::prior(),
                                                     config.eval_rollouts, config.seed);
            const EvalResult post =
                evaluate_policy(params, eval_tasks, Conditioning::posterior(0),
                                config.eval_rollouts, config.seed);
            log.evals.push_back(
                EvalPoint{iteration, prior.accuracy, prior.mean_length, post.accuracy,
                          post.mean_length});
        }
    }

    log.final_params = std::move(params);
    return log;
}

std::string training_log_to_csv(const TrainingLog& log) {
    std::string out = kTrainingCsvHeader;
    out += '\n';
    char buf[256];
    for (const TrainingRow& row : log.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      row.iteration, row.stats.prior_len_mean, row.stats.post_len_mean,
                      row.stats.prior_acc, row.stats.post_acc, row.stats.pg_loss,
                      row.stats.distill_loss, row.stats.s_hat_mean, row.stats.gated_frac);
        out += buf;
    }
    return out;
}

} // namespace erlab
