#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace erlab {

// Rollout streams are keyed, not shared: every stream seed is derived from
// (global seed, task uid, stream tag, rollout index), so results do not
// depend on scheduling or evaluation order.
enum class StreamTag : std::uint64_t {
    TaskGen = 1,
    PriorRollout = 2,
    PosteriorRollout = 3,
    EvalRollout = 4,
    Verify = 5,
    EvalTaskGen = 6,
};

std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b);

std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::uint64_t task_uid,
                                 StreamTag tag, std::uint64_t rollout_index);

// Deterministic stream wrapper. Uniform doubles are produced from the raw
// 64-bit output directly so behavior is identical across standard libraries
// (std::uniform_real_distribution is not portable bit-for-bit).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be >= 1.
    std::size_t next_index(std::size_t n) {
        const double u = next_unit();
        auto idx = static_cast<std::size_t>(u * static_cast<double>(n));
        return idx < n ? idx : n - 1;
    }

    // Uniform in [lo, hi).
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

private:
    std::mt19937_64 engine_;
};

// Index of the category containing u in the CDF walk over probs.
// probs must sum to ~1; u in [0, 1).
std::size_t pick_categorical(std::span<const double> probs, double u);

} // namespace erlab
