// Deterministic PRNG. splitmix64 (Steele, Lea, Vigna): a 64-bit state
// advanced by a Weyl constant and finalized by two xor-shift multiplies.
// Chosen over std engines so that streams are bit-identical across
// standard libraries and platforms.
#pragma once

#include <cstdint>
#include <vector>

#include "trailrate/common.hpp"

namespace trailrate {

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive; modulo bias is
    // irrelevant at the sizes used here but rejection keeps it exact.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller. Consumes exactly two uniforms per pair of calls.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream. Mixing via fnv1a of the tag keeps the
    // derivation order-free: derive("a") is the same whether or not
    // derive("b") happened first.
    Rng derive(std::string_view tag) const { return Rng(state_ ^ fnv1a(tag)); }
    Rng derive(std::string_view tag, std::uint64_t index) const {
        return Rng(state_ ^ fnv1a(tag) ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace trailrate
