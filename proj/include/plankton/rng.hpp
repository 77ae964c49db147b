#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace plankton {

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard, but the std:: distributions are not, so every draw here is
// derived from raw engine output with an explicitly written procedure.
// Algorithm identifier recorded in split manifests: see Rng::kAlgorithmId.
class Rng {
public:
    static constexpr const char* kAlgorithmId = "mt19937_64/fisher_yates/v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) from the top 53 bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi].
    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % n;
    }

    bool next_bool() { return (engine_() >> 63) != 0; }

    // Fisher-Yates, descending index order.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace plankton
