// sparsicode/rng.hpp
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "sparsicode/common.hpp"

namespace sparsicode {

// Deterministic random source. All sampling is hand-rolled on top of the raw
// mt19937_64 stream so that results are identical across standard libraries;
// std::uniform_int_distribution and friends are not portable.
class Rng {
public:
    static constexpr const char* kName = "mt19937_64";

    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t u64() { return gen_(); }

    // Uniform in [0, n). Rejection sampling, n >= 1.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw input_error("Rng::below: n must be positive");
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        for (;;) {
            std::uint64_t x = gen_();
            if (x < limit || limit == 0) return x % n;
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double real() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return real() < p; }

    // Seed for an independent child stream.
    std::uint64_t derive() {
        std::uint64_t z = gen_() + 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
};

} // namespace sparsicode
