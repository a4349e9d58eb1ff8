#pragma once

#include <cstdint>

namespace nhl {

/// Stateless counter-based generator: every draw is a pure function of (key, counter),
/// so realizations can be evaluated lazily at any lattice cell and in any order.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const
    {
        return mix(mix(mix(key_) ^ stream) ^ counter);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t stream, std::uint64_t counter) const
    {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

/// Folds a signed lattice index into a counter value.
constexpr std::uint64_t lattice_counter(std::int64_t i, std::int64_t j = 0)
{
    return CounterRng::mix(static_cast<std::uint64_t>(i)) ^
           (static_cast<std::uint64_t>(j) * 0xd6e8feb86659fd93ULL);
}

}  // namespace nhl
