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

#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace chaosmf {

//---------------------------------------------------------------------------//
// Philox4x32-10 block cipher (Salmon et al., SC'11).
//---------------------------------------------------------------------------//
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) noexcept;

//---------------------------------------------------------------------------//
/*!
 * Master seed plus a short label. The label is hashed into the key so that
 * two experiments sharing a master seed still draw unrelated numbers.
 */
struct SeedSpec
{
    std::uint64_t master_seed = 0;
    std::string run_label;

    PhiloxKey key() const noexcept;
    bool operator==(SeedSpec const&) const = default;
};

enum class RoleCategory : std::uint8_t
{
    poisson_proposal = 1,  // per-particle thinning clock (limit systems)
    mark = 2,              // per-neuron interaction marks
    initial = 3,           // per-particle initial condition
    brownian_shared = 4,   // the common Brownian motion W
    proposal_global = 5,   // aggregated thinning clock of the finite system
    auxiliary = 6,         // test-only and diagnostic side streams
};

/*!
 * Address of a stream: category, particle index, replication index.
 *
 * Every role lives inside a replication; the triple maps injectively onto
 * the upper two counter words of the Philox block.
 */
struct StreamRole
{
    RoleCategory category = RoleCategory::auxiliary;
    std::uint32_t index = 0;
    std::uint32_t replication = 0;

    static constexpr std::uint32_t max_replication = (1u << 24) - 1;

    static StreamRole proposal(std::uint32_t i, std::uint32_t r = 0) { return {RoleCategory::poisson_proposal, i, r}; }
    static StreamRole mark(std::uint32_t i, std::uint32_t r = 0) { return {RoleCategory::mark, i, r}; }
    static StreamRole initial(std::uint32_t i, std::uint32_t r = 0) { return {RoleCategory::initial, i, r}; }
    static StreamRole brownian(std::uint32_t r = 0) { return {RoleCategory::brownian_shared, 0, r}; }
    static StreamRole global_proposal(std::uint32_t r = 0) { return {RoleCategory::proposal_global, 0, r}; }
    static StreamRole aux(std::uint32_t i, std::uint32_t r = 0) { return {RoleCategory::auxiliary, i, r}; }

    bool operator==(StreamRole const&) const = default;
};

//---------------------------------------------------------------------------//
/*!
 * Counter-based random stream.
 *
 * The 128-bit Philox counter is (position lo, position hi, role index,
 * category << 24 | replication). Sequential draws advance the position;
 * random access via \c block_at does not touch the sequential state.
 * A stream is single-owner: copy it to fork an independent replay.
 */
class NoiseStream
{
public:
    NoiseStream() = default;
    NoiseStream(PhiloxKey key, StreamRole role);

    StreamRole role() const noexcept { return role_; }
    std::uint64_t position() const noexcept { return position_; }

    //! Next 32 random bits
    std::uint32_t next_u32() noexcept;
    //! Next 64 random bits
    std::uint64_t next_u64() noexcept;
    //! Uniform on [0, 1) with 53 bits of resolution
    double uniform() noexcept;
    //! Uniform on the open interval (0, 1)
    double uniform_open() noexcept;
    //! Uniform integer in [0, n); n must be positive
    std::uint64_t below(std::uint64_t n) noexcept;
    //! Standard normal (Box-Muller on one full block)
    double normal() noexcept;
    //! Exponential with the given rate (> 0, unchecked)
    double exponential(double rate) noexcept;

    //! Block at an arbitrary position, independent of the sequential cursor
    PhiloxCounter block_at(std::uint64_t position) const noexcept;
    //! Standard normal derived from the block at \p position
    double normal_at(std::uint64_t position) const noexcept;

private:
    void refill() noexcept;

    PhiloxKey key_{};
    StreamRole role_{};
    std::uint32_t role_word_ = 0;
    std::uint64_t position_ = 0;
    PhiloxCounter buffer_{};
    int used_ = 4;
};

//! Deterministic stream for a role. Pure; safe to call concurrently.
NoiseStream derive_stream(SeedSpec const& seed, StreamRole role);

//! Gaussian(0, dt) sample; throws std::invalid_argument if dt <= 0.
double brownian_increment(NoiseStream& stream, double dt);

//! Exponential(rate_bound) waiting time; throws if rate_bound <= 0.
double next_proposal(NoiseStream& stream, double rate_bound);

//! 64-bit FNV-1a; used for label hashing (stable across platforms).
std::uint64_t fnv1a64(std::string const& text) noexcept;

//! SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace chaosmf
