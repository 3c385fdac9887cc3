// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#include "lpmln/rng.hpp"

namespace lpmln {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix(seed + kGolden * (stream + 1))) {}

std::uint64_t CounterRng::next_u64() { return mix(key_ + kGolden * ++counter_); }

double CounterRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
    // rejection sampling over the top multiple of n
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t x = next_u64();
    while (x > limit) {
        x = next_u64();
    }
    return x % n;
}

CounterRng CounterRng::fork(std::uint64_t label) const {
    return CounterRng(seed_, mix(stream_ + kGolden * (label + 1)));
}

}  // namespace lpmln
