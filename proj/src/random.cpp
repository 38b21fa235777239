// Copyright 2026 The chaosmf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chaosmf/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chaosmf {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) noexcept
{
    std::uint64_t const p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double to_open_unit(std::uint64_t bits) noexcept
{
    // 52 bits so that the half-offset stays exactly representable below 1
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double box_muller(std::uint64_t a, std::uint64_t b) noexcept
{
    double const r = std::sqrt(-2.0 * std::log(to_open_unit(a)));
    return r * std::cos(2.0 * std::numbers::pi * to_unit(b));
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) noexcept
{
    return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) noexcept
{
    for (int round = 0; round < 10; ++round)
    {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMul0, c[0], lo0, hi0);
        mulhilo(kMul1, c[2], lo1, hi1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint64_t fnv1a64(std::string const& text) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text)
    {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

PhiloxKey SeedSpec::key() const noexcept
{
    std::uint64_t const k = mix64(mix64(master_seed) ^ fnv1a64(run_label));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

//---------------------------------------------------------------------------//
NoiseStream::NoiseStream(PhiloxKey key, StreamRole role) : key_(key), role_(role)
{
    if (role.replication > StreamRole::max_replication)
    {
        throw std::invalid_argument("replication index exceeds 24 bits");
    }
    role_word_ = (static_cast<std::uint32_t>(role.category) << 24) | role.replication;
}

PhiloxCounter NoiseStream::block_at(std::uint64_t position) const noexcept
{
    PhiloxCounter const ctr{static_cast<std::uint32_t>(position),
                            static_cast<std::uint32_t>(position >> 32), role_.index, role_word_};
    return philox4x32(ctr, key_);
}

double NoiseStream::normal_at(std::uint64_t position) const noexcept
{
    auto const b = block_at(position);
    return box_muller(join(b[0], b[1]), join(b[2], b[3]));
}

void NoiseStream::refill() noexcept
{
    buffer_ = block_at(position_++);
    used_ = 0;
}

std::uint32_t NoiseStream::next_u32() noexcept
{
    if (used_ == 4)
    {
        refill();
    }
    return buffer_[used_++];
}

std::uint64_t NoiseStream::next_u64() noexcept
{
    std::uint32_t const lo = next_u32();
    return join(lo, next_u32());
}

double NoiseStream::uniform() noexcept
{
    return to_unit(next_u64());
}

double NoiseStream::uniform_open() noexcept
{
    return to_open_unit(next_u64());
}

std::uint64_t NoiseStream::below(std::uint64_t n) noexcept
{
    // Lemire's multiply-shift with rejection of the biased sliver
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n)
    {
        std::uint64_t const threshold = (0 - n) % n;
        while (low < threshold)
        {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double NoiseStream::normal() noexcept
{
    std::uint64_t const a = next_u64();
    return box_muller(a, next_u64());
}

double NoiseStream::exponential(double rate) noexcept
{
    return -std::log(uniform_open()) / rate;
}

//---------------------------------------------------------------------------//
NoiseStream derive_stream(SeedSpec const& seed, StreamRole role)
{
    return NoiseStream(seed.key(), role);
}

double brownian_increment(NoiseStream& stream, double dt)
{
    if (!(dt > 0))
    {
        throw std::invalid_argument("brownian_increment: dt must be positive");
    }
    return std::sqrt(dt) * stream.normal();
}

double next_proposal(NoiseStream& stream, double rate_bound)
{
    if (!(rate_bound > 0))
    {
        throw std::invalid_argument("next_proposal: rate bound must be positive");
    }
    return stream.exponential(rate_bound);
}

}  // namespace chaosmf
