#include "erlab/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <unordered_set>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"
#include "erlab/rng.hpp"

namespace erlab {

const char* op_name(OpCode op) {
    switch (op) {
        case OpCode::Add1: return "+1";
        case OpCode::Add2: return "+2";
        case OpCode::Sub1: return "-1";
        case OpCode::Mul2: return "x2";
        case OpCode::Stop: return "STOP";
    }
    return "?";
}

OpCode op_from_name(const std::string& name) {
    if (name == "+1") return OpCode::Add1;
    if (name == "+2") return OpCode::Add2;
    if (name == "-1") return OpCode::Sub1;
    if (name == "x2" || name == "*2") return OpCode::Mul2;
    if (name == "STOP") return OpCode::Stop;
    throw ConfigError("unknown op code: '" + name + "'");
}

void WorldConfig::validate() const {
    if (start_min > start_max) throw ConfigError("start range is empty");
    if (answer_grid.empty()) throw ConfigError("answer_grid must be nonempty");
    std::unordered_set<int> seen;
    for (int y : answer_grid) {
        if (!seen.insert(y).second) throw ConfigError("answer_grid has duplicate entries");
    }
    if (op_set.empty()) throw ConfigError("op_set must be nonempty");
    if (std::count(op_set.begin(), op_set.end(), OpCode::Stop) != 1) {
        throw ConfigError("op_set must contain STOP exactly once");
    }
    std::unordered_set<int> ops_seen;
    for (OpCode op : op_set) {
        if (!ops_seen.insert(static_cast<int>(op)).second) {
            throw ConfigError("op_set has duplicate entries");
        }
    }
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be > 0");
}

WorldConfig default_world() {
    WorldConfig config;
    config.start_min = 0;
    config.start_max = 9;
    config.answer_grid.resize(21);
    for (int y = 0; y <= 20; ++y) config.answer_grid[static_cast<std::size_t>(y)] = y;
    config.op_set = {OpCode::Add1, OpCode::Add2, OpCode::Mul2, OpCode::Stop};
    config.max_steps = 4;
    config.kappa = 2.0;
    return config;
}

int apply_op(int value, OpCode op) {
    long long v = value;
    switch (op) {
        case OpCode::Add1: v += 1; break;
        case OpCode::Add2: v += 2; break;
        case OpCode::Sub1: v -= 1; break;
        case OpCode::Mul2: v *= 2; break;
        case OpCode::Stop: throw std::invalid_argument("apply_op: STOP is not executable");
    }
    v = std::clamp<long long>(v, -kValueSaturation, kValueSaturation);
    return static_cast<int>(v);
}

std::vector<int> reachable_values(const WorldConfig& config, int start_value) {
    std::set<int> reached{start_value};
    std::set<int> frontier{start_value};
    for (int step = 0; step < config.max_steps; ++step) {
        std::set<int> next;
        for (int v : frontier) {
            for (OpCode op : config.op_set) {
                if (op == OpCode::Stop) continue;
                const int w = apply_op(v, op);
                if (reached.insert(w).second) next.insert(w);
            }
        }
        if (next.empty()) break;
        frontier.swap(next);
    }
    return {reached.begin(), reached.end()};
}

namespace {

std::vector<int> reachable_answers(const WorldConfig& config, int start_value) {
    const std::vector<int> values = reachable_values(config, start_value);
    std::unordered_set<int> value_set(values.begin(), values.end());
    std::vector<int> answers;
    for (int y : config.answer_grid) {
        if (value_set.count(y) != 0) answers.push_back(y);
    }
    return answers;
}

// The reference answer is a function of the question, not of the generator
// seed: a task is verifiable because its start state determines the correct
// answer. The pick is a fixed pseudorandom assignment so answers spread over
// path depths across starts.
constexpr std::uint64_t kAnswerPickSalt = 0x616e7377; // "answ"

int answer_for_start(const WorldConfig& config, int start_value,
                     const std::vector<int>& answers) {
    const std::uint64_t h = mix_u64(kAnswerPickSalt + static_cast<std::uint64_t>(config.max_steps),
                                    static_cast<std::uint64_t>(start_value + kValueSaturation));
    return answers[h % answers.size()];
}

} // namespace

Task generate_task(std::uint64_t seed, const WorldConfig& config) {
    config.validate();
    Rng rng(derive_stream_seed(seed, 0, StreamTag::TaskGen, 0));

    const long long span = static_cast<long long>(config.start_max) - config.start_min + 1;
    constexpr long long kScanLimit = 4096;

    if (span <= kScanLimit) {
        std::vector<int> feasible_starts;
        for (int s = config.start_min; s <= config.start_max; ++s) {
            if (!reachable_answers(config, s).empty()) feasible_starts.push_back(s);
        }
        if (feasible_starts.empty()) {
            throw GenerationError("no start value in range can reach any grid answer");
        }
        const int start = feasible_starts[rng.next_index(feasible_starts.size())];
        const std::vector<int> answers = reachable_answers(config, start);
        return Task{start, answer_for_start(config, start, answers), config};
    }

    // Range too large to scan: sample starts and give up after a bounded
    // number of infeasible draws.
    for (int attempt = 0; attempt < kScanLimit; ++attempt) {
        const int start =
            config.start_min + static_cast<int>(rng.next_index(static_cast<std::size_t>(span)));
        const std::vector<int> answers = reachable_answers(config, start);
        if (!answers.empty()) {
            return Task{start, answer_for_start(config, start, answers), config};
        }
    }
    throw GenerationError("no reachable grid answer found after sampling start values");
}

Trajectory execute(const Task& task, std::span<const OpCode> actions) {
    const WorldConfig& world = task.world;
    if (actions.size() > static_cast<std::size_t>(world.max_steps)) {
        throw std::invalid_argument("execute: action sequence longer than max_steps");
    }
    Trajectory traj;
    traj.actions.reserve(actions.size());
    int value = task.start_value;
    int non_stop = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const OpCode op = actions[i];
        if (std::find(world.op_set.begin(), world.op_set.end(), op) == world.op_set.end()) {
            throw std::invalid_argument(std::string("execute: action outside op_set: ") +
                                        op_name(op));
        }
        traj.actions.push_back(op);
        if (op == OpCode::Stop) {
            if (i + 1 != actions.size()) {
                throw std::invalid_argument("execute: STOP before the final action");
            }
            break;
        }
        value = apply_op(value, op);
        ++non_stop;
    }
    traj.final_value = value;
    traj.length = std::max(1, non_stop);
    return traj;
}

double answer_log_likelihood_at(const WorldConfig& config, int final_value, int target) {
    std::vector<double> logits;
    logits.reserve(config.answer_grid.size());
    bool target_on_grid = false;
    double target_logit = 0.0;
    for (int y : config.answer_grid) {
        const double logit = -config.kappa * std::abs(static_cast<double>(y) - final_value);
        logits.push_back(logit);
        if (y == target) {
            target_on_grid = true;
            target_logit = logit;
        }
    }
    if (!target_on_grid) throw std::invalid_argument("answer target not on the grid");
    return target_logit - log_sum_exp(logits);
}

double answer_log_likelihood(const Task& task, const Trajectory& traj) {
    return answer_log_likelihood_at(task.world, traj.final_value, task.reference_answer);
}

int argmax_answer(const WorldConfig& config, int final_value) {
    int best = config.answer_grid.front();
    long long best_dist = std::llabs(static_cast<long long>(best) - final_value);
    for (int y : config.answer_grid) {
        const long long d = std::llabs(static_cast<long long>(y) - final_value);
        if (d < best_dist) {
            best = y;
            best_dist = d;
        }
    }
    return best;
}

std::string trajectory_to_string(const Trajectory& traj) {
    std::string out;
    for (std::size_t i = 0; i < traj.actions.size(); ++i) {
        if (i > 0) out += '|';
        out += op_name(traj.actions[i]);
    }
    return out;
}

} // namespace erlab
