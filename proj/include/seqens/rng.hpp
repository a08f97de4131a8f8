#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace seqens {

// Stateless splitmix64 finalizer, used for seed mixing.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro256++ with hand-rolled distributions so that streams are
// bit-reproducible across standard libraries. All randomness in the project
// flows from one root seed through named substreams (data, init, gumbel,
// search, ...) so components can be varied independently.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) {
            sm = mix64(sm);
            w = sm;
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    static Rng derive(std::uint64_t root_seed, std::string_view stream,
                      std::uint64_t a = 0, std::uint64_t b = 0) {
        std::uint64_t s = root_seed ^ fnv1a64(stream);
        s = mix64(s) + a;
        s = mix64(s) + b;
        return Rng(mix64(s));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform in log space; requires 0 < lo <= hi.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // Box-Muller; avoids caching so the stream position is call-count exact.
    double normal() {
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double logistic() {
        double u = clamp_open(uniform01());
        return std::log(u) - std::log1p(-u);
    }

    double gumbel() {
        double u = clamp_open(uniform01());
        return -std::log(-std::log(u));
    }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static double clamp_open(double u) {
        const double eps = 1e-15;
        if (u < eps) return eps;
        if (u > 1.0 - eps) return 1.0 - eps;
        return u;
    }

    std::uint64_t state_[4];
};

}  // namespace seqens
