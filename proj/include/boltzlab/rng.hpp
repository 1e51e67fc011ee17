#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace boltzlab {

// Counter-based random stream. Each draw hashes (key, counter), so streams
// keyed by (master seed, replica id) are independent and reproducible, and
// a stream can be copied cheaply to fork deterministic substreams.
class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng() : StreamRng(0, 0) {}
    StreamRng(std::uint64_t master_seed, std::uint64_t stream_id)
        : key_(mix(master_seed ^ mix(stream_id + 0x9e3779b97f4a7c15ull))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    result_type operator()() { return mix(key_ + counter_++ * 0x9e3779b97f4a7c15ull); }

    std::uint64_t counter() const { return counter_; }

    // Uniform in [0,1).
    double uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

    // Uniform in (0,1]; safe as a log() argument.
    double uniform_pos() { return double(((*this)() >> 11) + 1) * 0x1.0p-53; }

private:
    // splitmix64 finalizer, applied twice at construction for key whitening.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// One standard normal draw. Box-Muller kept explicit so streams do not
// depend on standard-library distribution internals.
inline double gaussian(StreamRng& rng) {
    double u1 = rng.uniform_pos();
    double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace boltzlab
