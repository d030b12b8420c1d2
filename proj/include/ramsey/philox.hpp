/*
   Copyright 2026 The ramsey-sync Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

/// Philox4x32-10 counter-based generator.
namespace ramsey::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32_10(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
               std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

/// Uniform in (0, 1) from a 32-bit word; never returns 0 or 1.
inline double to_open_unit(std::uint32_t x) { return (double(x) + 0.5) * 0x1p-32; }

/// Random numbers addressed by (seed, stream, index). Each call to block()
/// yields four 32-bit words; the same address always gives the same words.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint32_t stream)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

    Counter block(std::uint64_t index, std::uint32_t lane = 0) const {
        return philox4x32_10({std::uint32_t(index), std::uint32_t(index >> 32), stream_, lane}, key_);
    }

    /// Two independent standard normals (Box-Muller on the first two words).
    std::array<double, 2> normals(std::uint64_t index, std::uint32_t lane = 0) const {
        const Counter c = block(index, lane);
        const double r = std::sqrt(-2.0 * std::log(to_open_unit(c[0])));
        const double a = 2.0 * M_PI * to_open_unit(c[1]);
        return {r * std::cos(a), r * std::sin(a)};
    }

    std::array<double, 4> uniforms(std::uint64_t index, std::uint32_t lane = 0) const {
        const Counter c = block(index, lane);
        return {to_open_unit(c[0]), to_open_unit(c[1]), to_open_unit(c[2]), to_open_unit(c[3])};
    }

private:
    Key key_;
    std::uint32_t stream_;
};

}  // namespace ramsey::rng
