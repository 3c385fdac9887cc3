// This file is part of lpmln, a weight-learning toolkit for LP^MLN programs.
// Released under the MIT license. See LICENSE for details.
#pragma once

#include <cstdint>

namespace lpmln {

// Counter-based generator: the splitmix64 finalizer applied to
// key + counter * golden. Stateless apart from the counter, so every draw is
// a pure function of (seed, stream, counter) and runs are reproducible
// across platforms.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    double next_double();                     // uniform in [0, 1)
    std::uint64_t next_below(std::uint64_t n);  // unbiased, n > 0
    bool next_bool() { return next_u64() & 1; }

    // Independent child stream, derived deterministically from a label.
    CounterRng fork(std::uint64_t label) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace lpmln
