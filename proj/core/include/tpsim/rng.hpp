// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace tpsim {

// Deterministic random source. Wraps mt19937_64 but performs all range
// reduction itself; std::uniform_int_distribution is not pinned by the
// standard and would make runs differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_() >> 32); }

    // Uniform value in [0, n). n must be nonzero.
    std::uint64_t below(std::uint64_t n);

    // True with probability p (clamped to [0, 1]).
    bool chance(double p);

    // Fixed-width uppercase hex token drawn from this stream.
    std::string hex_token(int digits);

    // Derives an independent substream; forking with distinct ids from the
    // same parent yields uncorrelated deterministic streams.
    Rng fork(std::uint64_t stream_id) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace tpsim
