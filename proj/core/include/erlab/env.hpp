#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace erlab {

// Primitive arithmetic actions. Stop is a modeled action: the policy decides
// when a trajectory terminates, which is what makes length learnable.
enum class OpCode : std::uint8_t {
    Add1,
    Add2,
    Sub1,
    Mul2,
    Stop,
};

const char* op_name(OpCode op);
OpCode op_from_name(const std::string& name);

// Executed values saturate here so pathological op sequences cannot overflow.
inline constexpr int kValueSaturation = 1'000'000;

struct WorldConfig {
    int start_min = 0;
    int start_max = 9;
    std::vector<int> answer_grid;                 // nonempty, unique entries
    std::vector<OpCode> op_set;                   // must contain Stop
    int max_steps = 4;                            // T_max >= 1
    double kappa = 2.0;                           // answer-head sharpness, > 0

    // Throws ConfigError when any invariant is violated.
    void validate() const;

    bool operator==(const WorldConfig&) const = default;
};

// The fully enumerable default world: |Z| = 121 trajectories.
WorldConfig default_world();

struct Task {
    int start_value = 0;
    int reference_answer = 0;
    WorldConfig world;
};

struct Trajectory {
    std::vector<OpCode> actions;   // Stop appears only as the final element
    int final_value = 0;
    int length = 1;                // non-Stop action count, floored at 1

    bool operator==(const Trajectory&) const = default;
};

// Applies one non-Stop op with saturation.
int apply_op(int value, OpCode op);

// Values reachable from start_value with 0..max_steps non-Stop ops.
std::vector<int> reachable_values(const WorldConfig& config, int start_value);

// Deterministic in seed. The returned task is guaranteed to have at least one
// trajectory of length <= max_steps that lands exactly on reference_answer.
// Throws GenerationError when no start in range can reach any grid answer.
Task generate_task(std::uint64_t seed, const WorldConfig& config);

// Folds actions over task.start_value. Stop terminates execution and must not
// appear before the final element; at most max_steps actions are allowed.
Trajectory execute(const Task& task, std::span<const OpCode> actions);

// log L(z) = log P(y* | x, z) under the fixed answer head: a softmax over the
// answer grid with logits -kappa * |y - final_value|. Always <= 0, and
// exp-sums to exactly 1 over the grid.
double answer_log_likelihood(const Task& task, const Trajectory& traj);

// Same head evaluated at an arbitrary grid target (used by enumeration and
// the normalization checks).
double answer_log_likelihood_at(const WorldConfig& config, int final_value, int target);

// Grid entry closest to final_value; ties resolve to the earliest grid entry.
int argmax_answer(const WorldConfig& config, int final_value);

std::string trajectory_to_string(const Trajectory& traj);

} // namespace erlab
