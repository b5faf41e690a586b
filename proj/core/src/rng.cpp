// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/rng.hpp"

namespace tpsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling over the top multiple of n keeps the result unbiased.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v = engine_();
    while (v >= limit) {
        v = engine_();
    }
    return v % n;
}

bool Rng::chance(double p) {
    if (p <= 0.0) {
        // Keep the stream position independent of the outcome.
        engine_();
        return false;
    }
    if (p >= 1.0) {
        engine_();
        return true;
    }
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return unit < p;
}

std::string Rng::hex_token(int digits) {
    static const char* kHex = "0123456789ABCDEF";
    std::string out;
    out.reserve(static_cast<std::size_t>(digits));
    for (int i = 0; i < digits; ++i) {
        out.push_back(kHex[below(16)]);
    }
    return out;
}

Rng Rng::fork(std::uint64_t stream_id) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream_id ^ 0xa0761d6478bd642fULL)));
}

} // namespace tpsim
