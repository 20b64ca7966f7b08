#pragma once

#include <optional>
#include <span>
#include <vector>

#include "erlab/env.hpp"

namespace erlab {

struct HyperParams {
    double alpha = 0.5;         // efficiency sensitivity, >= 0
    double beta = 1.0;          // distillation weight, >= 0
    double eta_min = 0.5;       // efficiency clamp lower bound, > 0
    double eta_max = 2.0;       // efficiency clamp upper bound, >= eta_min
    int group_size = 4;         // G, >= 2
    double z_eps = 1e-8;        // Z-score epsilon, > 0
    double learning_rate = 0.03; // gamma, > 0

    void validate() const; // throws ConfigError
};

// Per-posterior-path utility pipeline output.
struct UtilityRecord {
    double u_post = 0.0;      // log-likelihood of y* given the path
    double r_correct = 0.0;   // max(0, u_post - group prior baseline)
    double eta = 0.0;         // clamped (l_base / l_z)^alpha
    double s_hat = 0.0;       // r_correct * eta, always >= 0
    double advantage = 0.0;   // group Z-score of s_hat
};

// One task's dual-stream sample group plus its scored records.
struct GroupBatch {
    Task task;
    std::vector<Trajectory> prior_paths;
    std::vector<Trajectory> posterior_paths;
    double l_base = 0.0;        // mean prior length
    double u_prior_mean = 0.0;  // mean prior answer log-likelihood
    std::vector<UtilityRecord> records; // one per posterior path
};

// Mean of answer_log_likelihood over the prior paths. Throws ConfigError on
// an empty group.
double prior_baseline(std::span<const Trajectory> prior_paths, const Task& task);

// max(0, u_post - u_prior_mean): the distribution alignment filter.
double relative_correctness(double u_post, double u_prior_mean);

// clamp((l_base / l_z)^alpha, eta_min, eta_max). Lengths are >= 1 by the
// environment's length floor.
double efficiency_coeff(double l_base, double l_z, const HyperParams& hp);

double utility(double r_correct, double eta);

// Z-score with population std and additive epsilon. Requires >= 2 entries.
std::vector<double> group_advantages(std::span<const double> s_hats, double z_eps);

// Scores a sampled group: baseline, per-path records, advantages. Requires at
// least one prior path and at least two posterior paths. When
// u_prior_override is set it replaces the same-task baseline (the
// batch-pooled baseline mode); l_base always stays the same-task mean.
GroupBatch make_group_batch(const Task& task, std::vector<Trajectory> prior_paths,
                            std::vector<Trajectory> posterior_paths, const HyperParams& hp,
                            std::optional<double> u_prior_override = std::nullopt);

} // namespace erlab
