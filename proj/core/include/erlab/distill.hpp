#pragma once

#include <optional>
#include <vector>

#include "erlab/policy.hpp"
#include "erlab/scoring.hpp"

namespace erlab {

struct GradientTerm {
    std::vector<double> grad;
    double loss = 0.0;
};

struct GradientBundle {
    std::vector<double> pg_grad;
    std::vector<double> distill_grad;
    std::vector<double> total_grad; // pg + beta * distill, componentwise
    double pg_loss = 0.0;
    double distill_loss = 0.0;
    double total_loss = 0.0;
};

// Posterior policy-gradient term: loss -(1/G) sum_i A_i log q(z_i | x, y*),
// advantages treated as constants. Gradients use Posterior conditioning.
GradientTerm pg_gradient(const PolicyParams& params, const GroupBatch& batch);

// Advantage-gated distillation term of the forward KL estimate:
//   loss     (1/G) sum_i 1(A_i > 0) (log q(z_i) - log pi(z_i))
//   gradient -(1/G) sum_i 1(A_i > 0) grad log pi(z_i | x)
// The q term enters the loss as a constant only; the gradient flows through
// the prior stream alone, so the goal-feature block is identically zero.
// gate_always_open bypasses the advantage gate (the freeze_gate ablation).
GradientTerm distill_gradient(const PolicyParams& params, const GroupBatch& batch,
                              bool gate_always_open = false);

// total = pg + beta * distill with loss bookkeeping. Throws ConfigError on a
// dimension mismatch.
GradientBundle total_gradient(const GradientTerm& pg, const GradientTerm& distill,
                              double beta);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0; // decoupled

    void validate() const;
};

struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    long step_count = 0;
    AdamConfig hyper;

    static OptimizerState init(std::size_t dim, AdamConfig hyper = {});
};

// One AdamW update with bias correction; optionally clips the gradient to
// max_grad_norm first. Throws NumericError on non-finite gradients or
// resulting weights, naming the offending component.
void optimizer_step(PolicyParams& params, std::span<const double> grad,
                    OptimizerState& state, double learning_rate,
                    std::optional<double> max_grad_norm = std::nullopt);

} // namespace erlab
