#include "erlab/distill.hpp"

#include <cmath>
#include <string>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"

namespace erlab {

namespace {

void axpy(std::vector<double>& acc, double scale, std::span<const double> x) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * x[i];
}

} // namespace

GradientTerm pg_gradient(const PolicyParams& params, const GroupBatch& batch) {
    const auto group = static_cast<double>(batch.posterior_paths.size());
    GradientTerm term;
    term.grad.assign(params.layout.dim(), 0.0);
    const Conditioning cond = Conditioning::posterior(batch.task.reference_answer);
    CompensatedSum loss;
    for (std::size_t i = 0; i < batch.posterior_paths.size(); ++i) {
        const double advantage = batch.records[i].advantage;
        const Trajectory& traj = batch.posterior_paths[i];
        loss.add(-advantage * log_prob(params, batch.task, traj, cond) / group);
        if (advantage != 0.0) {
            const std::vector<double> g = grad_log_prob(params, batch.task, traj, cond);
            axpy(term.grad, -advantage / group, g);
        }
    }
    term.loss = loss.value();
    return term;
}

GradientTerm distill_gradient(const PolicyParams& params, const GroupBatch& batch,
                              bool gate_always_open) {
    const auto group = static_cast<double>(batch.posterior_paths.size());
    GradientTerm term;
    term.grad.assign(params.layout.dim(), 0.0);
    const Conditioning prior = Conditioning::prior();
    const Conditioning posterior = Conditioning::posterior(batch.task.reference_answer);
    CompensatedSum loss;
    for (std::size_t i = 0; i < batch.posterior_paths.size(); ++i) {
        const bool gated = gate_always_open || batch.records[i].advantage > 0.0;
        if (!gated) continue;
        const Trajectory& traj = batch.posterior_paths[i];
        const double log_pi = log_prob(params, batch.task, traj, prior);
        // The posterior term is stop-gradient: it contributes to the loss
        // value but never to the gradient.
        const double log_q = log_prob(params, batch.task, traj, posterior);
        loss.add((log_q - log_pi) / group);
        const std::vector<double> g = grad_log_prob(params, batch.task, traj, prior);
        axpy(term.grad, -1.0 / group, g);
    }
    term.loss = loss.value();
    return term;
}

GradientBundle total_gradient(const GradientTerm& pg, const GradientTerm& distill,
                              double beta) {
    if (pg.grad.size() != distill.grad.size()) {
        throw ConfigError("total_gradient: dimension mismatch");
    }
    GradientBundle bundle;
    bundle.pg_grad = pg.grad;
    bundle.distill_grad = distill.grad;
    bundle.total_grad.resize(pg.grad.size());
    for (std::size_t i = 0; i < pg.grad.size(); ++i) {
        bundle.total_grad[i] = pg.grad[i] + beta * distill.grad[i];
    }
    bundle.pg_loss = pg.loss;
    bundle.distill_loss = distill.loss;
    bundle.total_loss = pg.loss + beta * distill.loss;
    return bundle;
}

void AdamConfig::validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

OptimizerState OptimizerState::init(std::size_t dim, AdamConfig hyper) {
    hyper.validate();
    OptimizerState state;
    state.first_moment.assign(dim, 0.0);
    state.second_moment.assign(dim, 0.0);
    state.step_count = 0;
    state.hyper = hyper;
    return state;
}

void optimizer_step(PolicyParams& params, std::span<const double> grad,
                    OptimizerState& state, double learning_rate,
                    std::optional<double> max_grad_norm) {
    if (grad.size() != params.weights.size() || state.first_moment.size() != grad.size()) {
        throw ConfigError("optimizer_step: dimension mismatch");
    }
    if (!all_finite(grad)) throw NumericError("optimizer_step: non-finite gradient");

    double scale = 1.0;
    if (max_grad_norm) {
        const double norm = l2_norm(grad);
        if (norm > *max_grad_norm && norm > 0.0) scale = *max_grad_norm / norm;
    }

    const AdamConfig& hp = state.hyper;
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad[i] * scale;
        state.first_moment[i] = hp.beta1 * state.first_moment[i] + (1.0 - hp.beta1) * g;
        state.second_moment[i] = hp.beta2 * state.second_moment[i] + (1.0 - hp.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        const double update = m_hat / (std::sqrt(v_hat) + hp.eps);
        params.weights[i] -= learning_rate * (update + hp.weight_decay * params.weights[i]);
        if (!std::isfinite(params.weights[i])) {
            throw NumericError("optimizer_step: weight " + std::to_string(i) +
                               " became non-finite");
        }
    }
}

} // namespace erlab
