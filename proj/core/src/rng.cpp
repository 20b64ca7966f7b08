#include "erlab/rng.hpp"

namespace erlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

std::uint64_t derive_stream_seed(std::uint64_t global_seed, std::uint64_t task_uid,
                                 StreamTag tag, std::uint64_t rollout_index) {
    std::uint64_t s = mix_u64(global_seed, task_uid);
    s = mix_u64(s, static_cast<std::uint64_t>(tag));
    s = mix_u64(s, rollout_index);
    return s;
}

std::size_t pick_categorical(std::span<const double> probs, double u) {
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return probs.size() - 1; // u landed in the rounding slack at the top
}

} // namespace erlab
