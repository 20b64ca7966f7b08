#pragma once

// Test-local oracles, deliberately independent of the core enumeration path.

#include <functional>
#include <vector>

#include "erlab/env.hpp"
#include "erlab/policy.hpp"
#include "erlab/rng.hpp"

namespace erlab::test {

// Every valid action sequence of the world: Stop-terminated prefixes plus
// full-length sequences without Stop. Brute force by construction.
inline void collect_sequences(const WorldConfig& world, std::vector<OpCode>& prefix, int depth,
                              std::vector<std::vector<OpCode>>& out) {
    for (OpCode op : world.op_set) {
        prefix.push_back(op);
        if (op == OpCode::Stop || depth + 1 == world.max_steps) {
            out.push_back(prefix);
        } else {
            collect_sequences(world, prefix, depth + 1, out);
        }
        prefix.pop_back();
    }
}

inline std::vector<std::vector<OpCode>> all_action_sequences(const WorldConfig& world) {
    std::vector<std::vector<OpCode>> out;
    std::vector<OpCode> prefix;
    collect_sequences(world, prefix, 0, out);
    return out;
}

inline PolicyParams random_params(const WorldConfig& world, Rng& rng, double scale) {
    PolicyParams params = PolicyParams::zeros(world);
    for (double& w : params.weights) w = rng.next_range(-scale, scale);
    return params;
}

// Central finite differences of a scalar function of the weights.
inline std::vector<double> fd_gradient(const std::function<double(const PolicyParams&)>& f,
                                       const PolicyParams& params, double h = 1e-5) {
    std::vector<double> grad(params.weights.size());
    PolicyParams probe = params;
    for (std::size_t i = 0; i < params.weights.size(); ++i) {
        const double w0 = params.weights[i];
        probe.weights[i] = w0 + h;
        const double hi = f(probe);
        probe.weights[i] = w0 - h;
        const double lo = f(probe);
        probe.weights[i] = w0;
        grad[i] = (hi - lo) / (2.0 * h);
    }
    return grad;
}

} // namespace erlab::test
