#pragma once

#include <cstdint>
#include <random>

namespace toda {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Substream per (master seed, replica index, tag); independent of scheduling.
class StreamFamily {
public:
    explicit StreamFamily(std::uint64_t seed) : seed_(seed) {}

    std::mt19937_64 stream(std::uint64_t index, std::uint64_t tag = 0) const {
        std::uint64_t k = splitmix64(seed_ ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
        k = splitmix64(k ^ splitmix64(index));
        std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(tag)};
        return std::mt19937_64(seq);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace toda
