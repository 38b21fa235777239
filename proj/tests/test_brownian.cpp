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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "chaosmf/brownian.hpp"
#include "chaosmf/stats.hpp"

using namespace chaosmf;

namespace {

std::vector<double> uniform_grid(double horizon, int steps)
{
    std::vector<double> t(steps + 1);
    for (int k = 0; k <= steps; ++k)
    {
        t[k] = horizon * k / steps;
    }
    return t;
}

}  // namespace

TEST_CASE("oracle path starts at zero and is a pure function of time")
{
    SeedSpec const seed{7, "oracle"};
    BrownianOracle const a(seed, 0, 2.0);
    BrownianOracle const b(seed, 0, 10.0);
    CHECK(a.value(0.0) == 0.0);
    for (double t : {0.1, 0.5, 1.0, 1.37, 2.0})
    {
        CHECK(a.value(t) == b.value(t));
    }
    CHECK(BrownianOracle(seed, 1, 2.0).value(1.0) != a.value(1.0));
    CHECK_THROWS_AS(a.value(2.5), std::out_of_range);
}

TEST_CASE("oracle increments have variance equal to their length")
{
    SeedSpec const seed{8, "var"};
    int const reps = 20000;
    std::vector<double> inc_a(reps), inc_b(reps);
    for (int r = 0; r < reps; ++r)
    {
        BrownianOracle const w(seed, r, 2.0);
        inc_a[r] = w.value(0.3) - w.value(0.1);
        inc_b[r] = w.value(1.7) - w.value(0.9);
    }
    auto var = [](std::vector<double> const& x) {
        double s = 0;
        for (double v : x)
        {
            s += v * v;
        }
        return s / x.size();
    };
    // Relative SE of a variance estimate is sqrt(2 / n) = 1%
    CHECK(var(inc_a) == doctest::Approx(0.2).epsilon(0.04));
    CHECK(var(inc_b) == doctest::Approx(0.8).epsilon(0.04));
    auto const c = correlation(inc_a, inc_b);
    CHECK(std::abs(c.value) < 4 / std::sqrt(double(reps)));
}

TEST_CASE("grid paths agree with the oracle at every resolution")
{
    auto const oracle = std::make_shared<BrownianOracle const>(SeedSpec{9, "grid"}, 0, 1.0);
    auto const coarse = make_brownian_path(oracle, uniform_grid(1.0, 10));
    auto const fine = make_brownian_path(oracle, uniform_grid(1.0, 1000));
    for (int k = 0; k <= 10; ++k)
    {
        CHECK(coarse.values()[k] == fine.values()[100 * k]);
    }
    CHECK(coarse.value_at(0.123) == oracle->value(0.123));
    CHECK(coarse.increment(0) == coarse.values()[1]);
}

TEST_CASE("paths reject malformed grids")
{
    CHECK_THROWS(BrownianPath({0.0, 0.5, 0.5}, {0.0, 1.0, 2.0}));
    CHECK_THROWS(BrownianPath({0.1, 0.5}, {0.0, 1.0}));
    CHECK_THROWS(BrownianPath({0.0, 0.5}, {0.2, 1.0}));
    BrownianPath const plain({0.0, 1.0}, {0.0, 0.4});
    CHECK(plain.value_at(1.0) == 0.4);
    CHECK_THROWS_AS(plain.value_at(0.5), std::out_of_range);
}

TEST_CASE("refinement keeps existing values and follows the bridge law")
{
    auto stream = derive_stream(SeedSpec{10, "refine"}, StreamRole::aux(0));
    auto const base = sample_brownian_path(stream, {0.0, 1.0, 2.0});

    auto const same = refine_brownian(base, {}, stream);
    CHECK(std::vector<double>(same.values().begin(), same.values().end())
          == std::vector<double>(base.values().begin(), base.values().end()));

    std::vector<double> const extra{0.25, 1.0, 1.5};
    auto const refined = refine_brownian(base, extra, stream);
    CHECK(refined.size() == 5);
    CHECK(refined.values()[0] == 0.0);
    CHECK(refined.value_at(1.0) == base.value_at(1.0));
    CHECK(refined.value_at(2.0) == base.value_at(2.0));

    std::vector<double> const unsorted{0.5, 0.25};
    CHECK_THROWS_AS(refine_brownian(base, unsorted, stream), std::invalid_argument);
    std::vector<double> const outside{2.5};
    CHECK_THROWS_AS(refine_brownian(base, outside, stream), std::out_of_range);

    // Midpoint of [0, 2]: conditional mean (W0 + W2) / 2, conditional variance 1/2
    BrownianPath const two({0.0, 2.0}, {0.0, 1.2});
    std::vector<double> const mid{1.0};
    int const n = 100000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i)
    {
        draws[i] = refine_brownian(two, mid, stream).value_at(1.0);
    }
    auto const ms = mean_se(draws);
    CHECK(std::abs(ms.mean - 0.6) < 3 * ms.se);
    CHECK(ms.se * ms.se * n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("superposed clocks match one aggregated clock")
{
    // N exponential(B) clocks merged versus one exponential(N B) clock
    int const n_clocks = 8;
    double const rate = 1.5;
    std::size_t const samples = 100000;
    auto agg = derive_stream(SeedSpec{12, "agg"}, StreamRole::aux(0));
    std::vector<double> aggregated(samples);
    for (auto& g : aggregated)
    {
        g = agg.exponential(n_clocks * rate);
    }
    std::vector<NoiseStream> clocks;
    std::vector<double> next(n_clocks);
    for (int i = 0; i < n_clocks; ++i)
    {
        clocks.push_back(derive_stream(SeedSpec{12, "sep"}, StreamRole::aux(i)));
        next[i] = clocks[i].exponential(rate);
    }
    std::vector<double> merged;
    double last = 0;
    while (merged.size() < samples)
    {
        auto const i = std::min_element(next.begin(), next.end()) - next.begin();
        merged.push_back(next[i] - last);
        last = next[i];
        next[i] += clocks[i].exponential(rate);
    }
    CHECK(ks_two_sample(aggregated, merged) < ks_critical_two_sample(samples, samples, 0.01));
    CHECK(ks_exponential(merged, n_clocks * rate) < ks_critical(samples, 0.01));
}
