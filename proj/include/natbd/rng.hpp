#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace natbd {

// All randomized steps (MIS permutations, image sampling, class expansion)
// draw from this generator rather than <random> distributions, so that the
// same seed yields the same bytes on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // splitmix64 step
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Unbiased uniform draw in [0, n). n == 0 returns 0.
    std::uint64_t bounded(std::uint64_t n) {
        if (n < 2) return 0;
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Derives an independent substream seed from a base seed, a purpose tag and
// an index. Purpose tags used in this project: "mis" (per-trigger MIS
// trials), "trial" (per-trial permutation), "clean"/"poison" (per-class
// sampling), "expand-classes"/"expand-clean" (dataset expansion). The
// derivation is pure mixing, so substreams are independent of the order in
// which they are consumed.
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose, std::uint64_t index);

}  // namespace natbd
