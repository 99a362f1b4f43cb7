#pragma once

#include <cstdint>

namespace rda {

/// Counter-based random numbers: every draw is a pure function of
/// (seed, stream, counter), so results do not depend on call order,
/// thread schedule or the standard library's distribution implementations.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t bits(std::uint64_t counter) const;

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t counter) const;

    /// Standard normal via Box-Muller on counters 2c and 2c+1 (cosine branch).
    double normal(std::uint64_t counter) const;

private:
    std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace rda
