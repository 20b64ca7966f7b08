#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erlab/env.hpp"
#include "erlab/rng.hpp"

namespace erlab {

// Which of the two parameter-shared streams is being evaluated.
//
// Prior:     the deployable policy pi(z|x); only base features are active.
// Posterior: the answer-conditioned stream q(z|x,y*); the same weights plus
//            goal features keyed on (sign, distance) to the target.
struct Conditioning {
    enum class Kind : std::uint8_t { Prior, Posterior };

    Kind kind = Kind::Prior;
    int target = 0; // meaningful only under Posterior

    static Conditioning prior() { return {Kind::Prior, 0}; }
    static Conditioning posterior(int target) { return {Kind::Posterior, target}; }

    bool is_posterior() const { return kind == Kind::Posterior; }
};

// Dense weight layout. Base block: (value bucket x action). Goal block:
// (sign of target-value delta x distance bucket x action), appended after the
// base block so the goal block can be addressed (and zeroed) as a unit.
struct FeatureLayout {
    int grid_min = 0;
    int grid_max = 0;
    std::size_t op_count = 0;
    std::size_t value_buckets = 0; // grid span + one bucket per side

    static constexpr std::size_t kSignCount = 3;     // below / at / above target
    static constexpr std::size_t kDistanceBuckets = 5; // 0, 1, 2, 3-4, >=5

    std::size_t base_dim() const { return value_buckets * op_count; }
    std::size_t goal_dim() const { return kSignCount * kDistanceBuckets * op_count; }
    std::size_t dim() const { return base_dim() + goal_dim(); }

    std::size_t value_bucket(int value) const;
    std::size_t distance_bucket(int distance) const;

    std::size_t base_index(int value, std::size_t action_idx) const;
    std::size_t goal_index(int value, int target, std::size_t action_idx) const;

    bool operator==(const FeatureLayout&) const = default;
};

FeatureLayout make_layout(const WorldConfig& config);

struct PolicyParams {
    FeatureLayout layout;
    std::vector<double> weights; // size layout.dim(), finite entries

    static PolicyParams zeros(const WorldConfig& config);
};

// Active feature ids for one (state, action) pair: one base feature, plus one
// goal feature under Posterior conditioning.
struct FeatureIndices {
    std::array<std::size_t, 2> ids{};
    std::size_t count = 0;

    const std::size_t* begin() const { return ids.data(); }
    const std::size_t* end() const { return ids.data() + count; }
};

FeatureIndices features(const FeatureLayout& layout, int current_value,
                        std::size_t action_idx, const Conditioning& cond);

struct StepDistribution {
    std::vector<double> probs; // aligned with world.op_set, strictly positive
};

// Softmax of per-action scores theta . phi(state, action).
// Throws NumericError if any score is non-finite.
StepDistribution step_distribution(const PolicyParams& params, const Task& task,
                                   int current_value, const Conditioning& cond);

// Draws actions sequentially until Stop or max_steps. Reproducible for a
// fixed (params, task, cond, rng stream).
Trajectory sample_trajectory(const PolicyParams& params, const Task& task,
                             const Conditioning& cond, Rng& rng);

// Sum over sampled steps of log step-probabilities, including the Stop step
// when the trajectory contains one.
double log_prob(const PolicyParams& params, const Task& task,
                const Trajectory& traj, const Conditioning& cond);

// Closed-form score-function gradient of log_prob: per step,
// phi(a_t) - E_{a ~ step}[phi(a)]. Goal components are exactly zero under
// Prior conditioning.
std::vector<double> grad_log_prob(const PolicyParams& params, const Task& task,
                                  const Trajectory& traj, const Conditioning& cond);

// Flat JSON dump with a layout header string; load refuses dumps whose layout
// does not match the expected world.
std::string params_to_json(const PolicyParams& params);
PolicyParams params_from_json(const std::string& text, const WorldConfig& expected_world);

} // namespace erlab
