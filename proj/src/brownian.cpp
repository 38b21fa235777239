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

#include "chaosmf/brownian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace chaosmf {
namespace {

constexpr int kUnitShift = 36;
constexpr int kLevelShift = 30;
constexpr std::uint64_t kIndexMask = (std::uint64_t{1} << kLevelShift) - 1;
constexpr std::uint64_t kBridgeLevel = 63;

inline std::uint64_t tree_position(std::uint64_t unit, std::uint64_t level, std::uint64_t index)
{
    return (unit << kUnitShift) | (level << kLevelShift) | index;
}

void check_grid(std::vector<double> const& times)
{
    if (times.empty() || times.front() != 0.0)
    {
        throw std::invalid_argument("Brownian grid must start at 0");
    }
    for (std::size_t i = 1; i < times.size(); ++i)
    {
        if (!(times[i] > times[i - 1]))
        {
            throw std::invalid_argument("Brownian grid must be strictly increasing");
        }
    }
}

}  // namespace

//---------------------------------------------------------------------------//
BrownianOracle::BrownianOracle(SeedSpec const& seed, std::uint32_t replication, double max_time)
    : stream_(derive_stream(seed, StreamRole::brownian(replication))), max_time_(max_time)
{
    if (!(max_time >= 0) || !std::isfinite(max_time) || max_time > 1e8)
    {
        throw std::invalid_argument("BrownianOracle: max_time out of range");
    }
    auto const units = static_cast<std::size_t>(std::ceil(max_time)) + 1;
    integer_values_.resize(units + 1);
    integer_values_[0] = 0.0;
    for (std::size_t n = 0; n < units; ++n)
    {
        integer_values_[n + 1] = integer_values_[n] + stream_.normal_at(tree_position(n, 0, 0));
    }
}

double BrownianOracle::value(double t) const
{
    if (!(t >= 0) || t > max_time_)
    {
        throw std::out_of_range("BrownianOracle: time outside [0, max_time]");
    }
    double const unit_d = std::floor(t);
    auto const unit = static_cast<std::uint64_t>(unit_d);
    double wa = integer_values_[unit];
    if (t == unit_d)
    {
        return wa;
    }
    double wb = integer_values_[unit + 1];
    double a = unit_d;
    double width = 1.0;
    std::uint64_t j = 0;
    for (int level = 1; level <= max_level; ++level)
    {
        width *= 0.5;
        double const m = a + width;
        double const wm = 0.5 * (wa + wb)
                          + std::sqrt(0.5 * width)
                                * stream_.normal_at(tree_position(unit, level, 2 * j + 1));
        if (t == m)
        {
            return wm;
        }
        if (t < m)
        {
            wb = wm;
            j = 2 * j;
        }
        else
        {
            wa = wm;
            a = m;
            j = 2 * j + 1;
        }
    }
    double const b = a + width;
    std::uint64_t const index = mix64(std::bit_cast<std::uint64_t>(t)) & kIndexMask;
    double const z = stream_.normal_at(tree_position(unit, kBridgeLevel, index));
    double const mean = wa + (t - a) / width * (wb - wa);
    return mean + std::sqrt((t - a) * (b - t) / width) * z;
}

//---------------------------------------------------------------------------//
BrownianPath::BrownianPath(std::vector<double> times, std::vector<double> values,
                           std::shared_ptr<BrownianOracle const> oracle)
    : times_(std::move(times)), values_(std::move(values)), oracle_(std::move(oracle))
{
    if (times_.size() != values_.size())
    {
        throw std::invalid_argument("BrownianPath: times and values differ in length");
    }
    check_grid(times_);
    if (values_.front() != 0.0)
    {
        throw std::invalid_argument("BrownianPath: W_0 must be 0");
    }
}

double BrownianPath::value_at(double t) const
{
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it != times_.end() && *it == t)
    {
        return values_[static_cast<std::size_t>(it - times_.begin())];
    }
    if (oracle_)
    {
        return oracle_->value(t);
    }
    throw std::out_of_range("BrownianPath: time is not on the grid");
}

BrownianPath make_brownian_path(std::shared_ptr<BrownianOracle const> oracle,
                                std::vector<double> times)
{
    check_grid(times);
    std::vector<double> values(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
    {
        values[k] = oracle->value(times[k]);
    }
    return BrownianPath(std::move(times), std::move(values), std::move(oracle));
}

BrownianPath sample_brownian_path(NoiseStream& stream, std::vector<double> times)
{
    check_grid(times);
    std::vector<double> values(times.size(), 0.0);
    for (std::size_t k = 1; k < times.size(); ++k)
    {
        values[k] = values[k - 1] + brownian_increment(stream, times[k] - times[k - 1]);
    }
    return BrownianPath(std::move(times), std::move(values));
}

BrownianPath refine_brownian(BrownianPath const& path, std::span<double const> new_times,
                             NoiseStream& stream)
{
    if (!std::is_sorted(new_times.begin(), new_times.end()))
    {
        throw std::invalid_argument("refine_brownian: new times must be sorted");
    }
    auto const old_t = path.times();
    auto const old_w = path.values();
    if (!new_times.empty() && (new_times.front() < 0 || new_times.back() > old_t.back()))
    {
        throw std::out_of_range("refine_brownian: new times outside the grid span");
    }
    std::vector<double> times;
    std::vector<double> values;
    times.reserve(old_t.size() + new_times.size());
    values.reserve(old_t.size() + new_times.size());

    std::size_t next = 0;
    for (std::size_t k = 0; k < old_t.size(); ++k)
    {
        // Bridge points strictly inside (t_{k-1}, t_k), conditioned on the
        // last accepted point on the left and the old grid point on the right
        while (next < new_times.size() && new_times[next] < old_t[k])
        {
            double const s = new_times[next++];
            if (s == times.back())
            {
                continue;
            }
            double const a = times.back();
            double const wa = values.back();
            double const b = old_t[k];
            double const wb = old_w[k];
            double const mean = wa + (s - a) / (b - a) * (wb - wa);
            double const var = (s - a) * (b - s) / (b - a);
            times.push_back(s);
            values.push_back(mean + std::sqrt(var) * stream.normal());
        }
        while (next < new_times.size() && new_times[next] == old_t[k])
        {
            ++next;
        }
        times.push_back(old_t[k]);
        values.push_back(old_w[k]);
    }
    return BrownianPath(std::move(times), std::move(values));
}

}  // namespace chaosmf
