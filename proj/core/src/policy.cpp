#include "erlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"
#include "erlab/version.hpp"

namespace erlab {

std::size_t FeatureLayout::value_bucket(int value) const {
    if (value < grid_min) return 0;
    if (value > grid_max) return value_buckets - 1;
    return static_cast<std::size_t>(value - grid_min) + 1;
}

std::size_t FeatureLayout::distance_bucket(int distance) const {
    const int d = std::abs(distance);
    if (d == 0) return 0;
    if (d == 1) return 1;
    if (d == 2) return 2;
    if (d <= 4) return 3;
    return 4;
}

std::size_t FeatureLayout::base_index(int value, std::size_t action_idx) const {
    return value_bucket(value) * op_count + action_idx;
}

std::size_t FeatureLayout::goal_index(int value, int target, std::size_t action_idx) const {
    const int delta = target - value;
    const std::size_t sign_idx = delta < 0 ? 0 : (delta == 0 ? 1 : 2);
    const std::size_t dist_idx = distance_bucket(delta);
    return base_dim() + (sign_idx * kDistanceBuckets + dist_idx) * op_count + action_idx;
}

FeatureLayout make_layout(const WorldConfig& config) {
    config.validate();
    FeatureLayout layout;
    const auto [lo, hi] = std::minmax_element(config.answer_grid.begin(), config.answer_grid.end());
    layout.grid_min = *lo;
    layout.grid_max = *hi;
    layout.op_count = config.op_set.size();
    layout.value_buckets = static_cast<std::size_t>(layout.grid_max - layout.grid_min + 1) + 2;
    return layout;
}

PolicyParams PolicyParams::zeros(const WorldConfig& config) {
    PolicyParams params;
    params.layout = make_layout(config);
    params.weights.assign(params.layout.dim(), 0.0);
    return params;
}

FeatureIndices features(const FeatureLayout& layout, int current_value,
                        std::size_t action_idx, const Conditioning& cond) {
    FeatureIndices out;
    out.ids[out.count++] = layout.base_index(current_value, action_idx);
    if (cond.is_posterior()) {
        out.ids[out.count++] = layout.goal_index(current_value, cond.target, action_idx);
    }
    return out;
}

namespace {

double action_score(const PolicyParams& params, int current_value, std::size_t action_idx,
                    const Conditioning& cond) {
    double score = 0.0;
    for (std::size_t id : features(params.layout, current_value, action_idx, cond)) {
        score += params.weights[id];
    }
    return score;
}

} // namespace

StepDistribution step_distribution(const PolicyParams& params, const Task& task,
                                   int current_value, const Conditioning& cond) {
    const std::size_t n = task.world.op_set.size();
    StepDistribution dist;
    dist.probs.resize(n);
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        const double s = action_score(params, current_value, a, cond);
        if (!std::isfinite(s)) {
            throw NumericError("non-finite action score at value " +
                               std::to_string(current_value));
        }
        dist.probs[a] = s;
        max_score = std::max(max_score, s);
    }
    double total = 0.0;
    for (double& p : dist.probs) {
        p = std::exp(p - max_score);
        total += p;
    }
    for (double& p : dist.probs) p /= total;
    return dist;
}

Trajectory sample_trajectory(const PolicyParams& params, const Task& task,
                             const Conditioning& cond, Rng& rng) {
    const WorldConfig& world = task.world;
    Trajectory traj;
    int value = task.start_value;
    int non_stop = 0;
    for (int step = 0; step < world.max_steps; ++step) {
        const StepDistribution dist = step_distribution(params, task, value, cond);
        const std::size_t a = pick_categorical(dist.probs, rng.next_unit());
        const OpCode op = world.op_set[a];
        traj.actions.push_back(op);
        if (op == OpCode::Stop) break;
        value = apply_op(value, op);
        ++non_stop;
    }
    traj.final_value = value;
    traj.length = std::max(1, non_stop);
    return traj;
}

double log_prob(const PolicyParams& params, const Task& task, const Trajectory& traj,
                const Conditioning& cond) {
    const WorldConfig& world = task.world;
    double total = 0.0;
    int value = task.start_value;
    for (OpCode op : traj.actions) {
        const StepDistribution dist = step_distribution(params, task, value, cond);
        const auto it = std::find(world.op_set.begin(), world.op_set.end(), op);
        if (it == world.op_set.end()) {
            throw std::invalid_argument("log_prob: action outside op_set");
        }
        const auto a = static_cast<std::size_t>(it - world.op_set.begin());
        total += std::log(dist.probs[a]);
        if (op != OpCode::Stop) value = apply_op(value, op);
    }
    return total;
}

std::vector<double> grad_log_prob(const PolicyParams& params, const Task& task,
                                  const Trajectory& traj, const Conditioning& cond) {
    const WorldConfig& world = task.world;
    std::vector<double> grad(params.layout.dim(), 0.0);
    int value = task.start_value;
    for (OpCode op : traj.actions) {
        const StepDistribution dist = step_distribution(params, task, value, cond);
        const auto it = std::find(world.op_set.begin(), world.op_set.end(), op);
        if (it == world.op_set.end()) {
            throw std::invalid_argument("grad_log_prob: action outside op_set");
        }
        const auto taken = static_cast<std::size_t>(it - world.op_set.begin());
        // phi(a_t) - E_{a ~ step}[phi(a)]
        for (std::size_t id : features(params.layout, value, taken, cond)) {
            grad[id] += 1.0;
        }
        for (std::size_t a = 0; a < world.op_set.size(); ++a) {
            for (std::size_t id : features(params.layout, value, a, cond)) {
                grad[id] -= dist.probs[a];
            }
        }
        if (op != OpCode::Stop) value = apply_op(value, op);
    }
    return grad;
}

std::string params_to_json(const PolicyParams& params) {
    nlohmann::json doc;
    doc["layout"] = kParamsLayoutVersion;
    doc["grid_min"] = params.layout.grid_min;
    doc["grid_max"] = params.layout.grid_max;
    doc["op_count"] = params.layout.op_count;
    doc["value_buckets"] = params.layout.value_buckets;
    doc["dim_base"] = params.layout.base_dim();
    doc["dim_goal"] = params.layout.goal_dim();
    doc["weights"] = params.weights;
    return doc.dump(2) + "\n";
}

PolicyParams params_from_json(const std::string& text, const WorldConfig& expected_world) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("params JSON parse error: ") + e.what());
    }
    if (doc.value("layout", "") != kParamsLayoutVersion) {
        throw ConfigError("params dump has unsupported layout version");
    }
    PolicyParams params;
    params.layout = make_layout(expected_world);
    if (doc.value("grid_min", 0) != params.layout.grid_min ||
        doc.value("grid_max", 0) != params.layout.grid_max ||
        doc.value("op_count", std::size_t{0}) != params.layout.op_count) {
        throw ConfigError("params dump does not match the expected world layout");
    }
    params.weights = doc.at("weights").get<std::vector<double>>();
    if (params.weights.size() != params.layout.dim()) {
        throw ConfigError("params dump has wrong weight count");
    }
    if (!all_finite(params.weights)) throw NumericError("params dump has non-finite weights");
    return params;
}

} // namespace erlab
