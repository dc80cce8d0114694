#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "occauth/types.hpp"

namespace occauth {

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distribution transforms live here
// because the std ones are implementation-defined. Identical seeds therefore
// give identical streams everywhere.
class Rng {
public:
    explicit Rng(RngSeed seed) : engine_(seed.value) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal deviate (Box-Muller, spare cached).
    double normal();

    // [0, n); rejection sampling keeps the draw unbiased.
    std::size_t uniform_index(std::size_t n);

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derive an independent sub-stream seed, so parallel work items can draw
// reproducibly regardless of scheduling.
RngSeed derive_seed(RngSeed base, std::string_view stream_tag);
RngSeed derive_seed(RngSeed base, std::uint64_t index);

}  // namespace occauth
