#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace thermogen {

// Counter-based generator: output i of stream (seed, stream) is a pure
// function of (seed, stream, i), so state serializes as three integers and
// the sequence is identical on every platform. std::mt19937 would work too
// but its distributions are implementation-defined; we need bit-stable
// uniform/normal draws for reproducible training and checkpoint resume.
class Rng {
public:
    Rng() = default;
    Rng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    uint64_t next_u64() {
        uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (stream_ + 1);
        z += 0x9E3779B97F4A7C15ULL * ++counter_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    float uniform(float lo, float hi) {
        return lo + static_cast<float>(uniform()) * (hi - lo);
    }

    // Box-Muller; two fresh draws per call, nothing cached.
    float normal(float mean = 0.0f, float stddev = 1.0f) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double n = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        return mean + stddev * static_cast<float>(n);
    }

    // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
    // the small n used here, but do the rejection anyway.
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }
    uint64_t counter() const { return counter_; }
    void restore(uint64_t seed, uint64_t stream, uint64_t counter) {
        seed_ = seed;
        stream_ = stream;
        counter_ = counter;
    }

private:
    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint64_t counter_ = 0;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.uniform_int(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace thermogen
