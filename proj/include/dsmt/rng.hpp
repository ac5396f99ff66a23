#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace dsmt {

// Counter-based splittable generator. Every random decision in the toolkit
// derives from one explicit seed through split() calls, so runs are
// reproducible bit-for-bit and independent of evaluation order elsewhere.
//
// The core is the SplitMix64 finalizer; child streams are derived as a pure
// function of (parent state, salt), so splitting does not advance the parent.
class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : state_(mix(seed ^ kGamma)) {}

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Child stream for a labelled sub-task. Pure: does not advance *this.
    SplitRng split(uint64_t salt) const {
        return SplitRng(mix(state_ ^ mix(salt * 0xd1b54a32d192ed03ull + 1)));
    }

    SplitRng split(std::string_view label) const {
        uint64_t h = 0xcbf29ce484222325ull; // FNV-1a
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return split(h);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; consumes exactly two draws per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Uniform integer in [0, n). n must be positive.
    int64_t uniform_int(int64_t n) {
        return static_cast<int64_t>(
            (static_cast<unsigned __int128>(next_u64()) * static_cast<uint64_t>(n)) >> 64);
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    static constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ull;
    uint64_t state_;
};

} // namespace dsmt
