#pragma once

#include <cmath>
#include <cstdint>

namespace agewake {

/// splitmix64 step; used both as a stream-splitting hash and as the
/// generator state update.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Small deterministic 64-bit generator. Uniform doubles are produced by an
/// explicit bit manipulation, so identical seeds give bit-identical streams
/// on every platform (std::uniform_real_distribution makes no such promise).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Decorrelate trivially related seeds.
        splitmix64(state_);
    }

    /// Derives an independent stream for (seed, stream_index) pairs, so
    /// sweeps can hand each run its own generator.
    static Rng split(std::uint64_t seed, std::uint64_t stream_index) {
        std::uint64_t s = seed;
        const std::uint64_t a = splitmix64(s);
        s = stream_index ^ 0x9e3779b97f4a7c15ULL;
        return Rng(a ^ splitmix64(s));
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential with the given mean, by inverse CDF.
    double exponential(double mean) {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return -mean * std::log(u);
    }

  private:
    std::uint64_t state_;
};

}  // namespace agewake
