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

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "chaosmf/random.hpp"

namespace chaosmf {

//---------------------------------------------------------------------------//
/*!
 * Random-access Brownian motion.
 *
 * W on the integers is a random walk with standard normal steps. Inside each
 * unit interval the path is filled in by dyadic Levy-Ciesielski midpoint
 * refinement down to width 2^-30, then by a final Brownian bridge. Every
 * normal is addressed by its position in the refinement tree, so W(t) is a
 * pure function of (seed, replication, t): grids of any resolution and
 * arbitrary jump-time queries observe one and the same path.
 */
class BrownianOracle
{
public:
    static constexpr int max_level = 30;

    //! Supports queries on [0, max_time]
    BrownianOracle(SeedSpec const& seed, std::uint32_t replication, double max_time);

    double value(double t) const;
    double max_time() const noexcept { return max_time_; }

private:
    NoiseStream stream_;
    double max_time_;
    std::vector<double> integer_values_;
};

//---------------------------------------------------------------------------//
/*!
 * Brownian values on a grid. Immutable once built.
 *
 * A path built from an oracle answers \c value_at for any time in range;
 * otherwise only grid times are available.
 */
class BrownianPath
{
public:
    BrownianPath() = default;
    BrownianPath(std::vector<double> times, std::vector<double> values,
                 std::shared_ptr<BrownianOracle const> oracle = nullptr);

    std::span<double const> times() const noexcept { return times_; }
    std::span<double const> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return times_.size(); }
    std::shared_ptr<BrownianOracle const> const& oracle() const noexcept { return oracle_; }

    //! W(t); throws std::out_of_range if t is neither a grid time nor oracle-backed
    double value_at(double t) const;
    //! W(t_{k+1}) - W(t_k)
    double increment(std::size_t k) const { return values_.at(k + 1) - values_.at(k); }

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::shared_ptr<BrownianOracle const> oracle_;
};

//! Evaluate the oracle on a grid (strictly increasing, starting at 0)
BrownianPath make_brownian_path(std::shared_ptr<BrownianOracle const> oracle,
                                std::vector<double> times);

//! Sequential independent-increment sampling on a grid (no oracle attached)
BrownianPath sample_brownian_path(NoiseStream& stream, std::vector<double> times);

/*!
 * Insert \p new_times by sequential Brownian-bridge sampling. Existing values
 * are untouched; times already on the grid are skipped. The result carries no
 * oracle. Throws std::invalid_argument if \p new_times is unsorted and
 * std::out_of_range if a time lies outside the grid span.
 */
BrownianPath refine_brownian(BrownianPath const& path, std::span<double const> new_times,
                             NoiseStream& stream);

}  // namespace chaosmf
