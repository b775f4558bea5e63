#pragma once

#include <cstdint>
#include <random>

namespace lorag {

/// Seed for substream `stream` of a run seeded with `seed`. Episode, line and
/// iteration seeds all come from here so parallel schedules stay reproducible.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// mt19937_64 plus a portable [0, 1) draw; std::uniform_real_distribution is
// not specified bit-exactly across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

}  // namespace lorag
