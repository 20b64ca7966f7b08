#include "erlab/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"

namespace erlab {

void HyperParams::validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
    if (!(eta_min > 0.0)) throw ConfigError("eta_min must be > 0");
    if (!(eta_max >= eta_min)) throw ConfigError("eta_max must be >= eta_min");
    if (group_size < 2) throw ConfigError("group_size must be >= 2");
    if (!(z_eps > 0.0)) throw ConfigError("z_eps must be > 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
}

double prior_baseline(std::span<const Trajectory> prior_paths, const Task& task) {
    if (prior_paths.empty()) throw ConfigError("prior_baseline: empty group");
    CompensatedSum sum;
    for (const Trajectory& traj : prior_paths) {
        sum.add(answer_log_likelihood(task, traj));
    }
    return sum.value() / static_cast<double>(prior_paths.size());
}

double relative_correctness(double u_post, double u_prior_mean) {
    return std::max(0.0, u_post - u_prior_mean);
}

double efficiency_coeff(double l_base, double l_z, const HyperParams& hp) {
    const double ratio = l_base / l_z;
    return std::clamp(std::pow(ratio, hp.alpha), hp.eta_min, hp.eta_max);
}

double utility(double r_correct, double eta) {
    return r_correct * eta;
}

std::vector<double> group_advantages(std::span<const double> s_hats, double z_eps) {
    if (s_hats.size() < 2) throw ConfigError("group_advantages: need at least 2 utilities");
    const MeanStd stats = population_mean_std(s_hats);
    std::vector<double> advantages(s_hats.size());
    for (std::size_t i = 0; i < s_hats.size(); ++i) {
        advantages[i] = (s_hats[i] - stats.mean) / (stats.std_dev + z_eps);
    }
    return advantages;
}

GroupBatch make_group_batch(const Task& task, std::vector<Trajectory> prior_paths,
                            std::vector<Trajectory> posterior_paths, const HyperParams& hp,
                            std::optional<double> u_prior_override) {
    if (posterior_paths.size() < 2) {
        throw ConfigError("make_group_batch: need at least 2 posterior paths");
    }
    GroupBatch batch;
    batch.task = task;
    batch.u_prior_mean = u_prior_override.value_or(prior_baseline(prior_paths, task));
    CompensatedSum len_sum;
    for (const Trajectory& traj : prior_paths) len_sum.add(traj.length);
    batch.l_base = len_sum.value() / static_cast<double>(prior_paths.size());
    batch.prior_paths = std::move(prior_paths);
    batch.posterior_paths = std::move(posterior_paths);

    std::vector<double> s_hats;
    s_hats.reserve(batch.posterior_paths.size());
    for (const Trajectory& traj : batch.posterior_paths) {
        UtilityRecord rec;
        rec.u_post = answer_log_likelihood(task, traj);
        rec.r_correct = relative_correctness(rec.u_post, batch.u_prior_mean);
        rec.eta = efficiency_coeff(batch.l_base, traj.length, hp);
        rec.s_hat = utility(rec.r_correct, rec.eta);
        s_hats.push_back(rec.s_hat);
        batch.records.push_back(rec);
    }
    const std::vector<double> advantages = group_advantages(s_hats, hp.z_eps);
    for (std::size_t i = 0; i < advantages.size(); ++i) {
        batch.records[i].advantage = advantages[i];
    }
    return batch;
}

} // namespace erlab
