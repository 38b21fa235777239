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
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chaosmf/errors.hpp"
#include "chaosmf/finite_system.hpp"
#include "chaosmf/stats.hpp"

using namespace chaosmf;

namespace {

//! Direct replay: decay every coordinate, then apply the event
std::vector<double> naive_state(FiniteTrajectory const& traj, double t)
{
    std::vector<double> x = traj.initial_states();
    double now = 0;
    double const kick = 1.0 / std::sqrt(double(traj.size()));
    for (auto const& e : traj.events())
    {
        if (!e.accepted || e.time > t)
        {
            if (e.time > t)
            {
                break;
            }
            continue;
        }
        for (auto& v : x)
        {
            v *= std::exp(-traj.alpha() * (e.time - now));
        }
        now = e.time;
        for (std::size_t j = 0; j < x.size(); ++j)
        {
            x[j] = j == e.neuron ? 0.0 : x[j] + *e.mark * kick;
        }
    }
    for (auto& v : x)
    {
        v *= std::exp(-traj.alpha() * (t - now));
    }
    return x;
}

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

}  // namespace

TEST_CASE("decay frame: kicks and exact decay")
{
    DecayFrame frame(1.0, 4, {0.1, 0.2, 0.3, 0.4});
    frame.jump(0.0, 1, 0.6);
    std::vector<double> x;
    frame.values(0.0, x);
    CHECK(x[1] == 0.0);
    CHECK(x[0] == doctest::Approx(0.4));
    CHECK(x[2] == doctest::Approx(0.6));
    CHECK(x[3] == doctest::Approx(0.7));

    DecayFrame half(std::numbers::ln2, 1, {2.0});
    CHECK(half.value(0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("event log is ordered and replays exactly")
{
    ModelSpec spec;
    spec.initial_law = InitialLaw::gaussian(0.5, 1.0);
    FiniteOptions opts;
    opts.log_rejected = true;
    auto const traj = simulate_finite(spec, 16, 5.0, SeedSpec{1, "replay"}, opts);
    REQUIRE(traj.events().size() > 100);
    double prev = 0;
    std::size_t accepted = 0;
    for (auto const& e : traj.events())
    {
        REQUIRE(e.time > prev);
        prev = e.time;
        REQUIRE(e.neuron < 16);
        REQUIRE(e.mark.has_value() == e.accepted);
        accepted += e.accepted;
    }
    CHECK(accepted == traj.accepted_count());
    CHECK(traj.events().size() > accepted);

    for (double t : {0.0, 0.7, 2.5, 5.0})
    {
        auto const a = state_at(traj, t);
        auto const b = naive_state(traj, t);
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-11));
        }
    }
    CHECK(state_at(traj, 0.0) == traj.initial_states());
    CHECK_THROWS_AS(state_at(traj, 5.5), std::out_of_range);
    CHECK_THROWS_AS(state_at(traj, -0.1), std::out_of_range);
}

TEST_CASE("pre-states, post-states and left limits")
{
    ModelSpec spec;
    auto const traj = simulate_finite(spec, 8, 3.0, SeedSpec{2, "pre"});
    int checked = 0;
    for (auto const& e : traj.events())
    {
        auto const before = state_at(traj, e.time, true);
        auto const after = state_at(traj, e.time);
        CHECK(before[e.neuron] == doctest::Approx(e.pre_state).epsilon(1e-12));
        CHECK(after[e.neuron] == 0.0);
        for (std::uint32_t j = 0; j < 8; ++j)
        {
            if (j != e.neuron)
            {
                CHECK(after[j] - before[j] == doctest::Approx(*e.mark / std::sqrt(8.0)));
            }
        }
        if (++checked == 20)
        {
            break;
        }
    }
    // Between consecutive events log|X| falls with slope -alpha
    auto const& ev = traj.events();
    REQUIRE(ev.size() > 3);
    double const t0 = ev[1].time, t1 = ev[2].time;
    double const a = t0 + 0.25 * (t1 - t0), b = t0 + 0.75 * (t1 - t0);
    auto const xa = state_at(traj, a), xb = state_at(traj, b);
    for (std::size_t i = 0; i < xa.size(); ++i)
    {
        if (xa[i] != 0.0)
        {
            CHECK((std::log(std::abs(xb[i])) - std::log(std::abs(xa[i]))) / (b - a)
                  == doctest::Approx(-spec.alpha).epsilon(1e-9));
        }
    }
}

TEST_CASE("single-neuron cursor matches the full replay bit for bit")
{
    ModelSpec spec;
    spec.initial_law = InitialLaw::uniform(-1, 1);
    auto const traj = simulate_finite(spec, 32, 20.0, SeedSpec{3, "single"});
    FiniteCursor full(traj);
    FiniteCursor single(traj, 5u);
    std::vector<double> x;
    for (double t = 0; t <= 20.0; t += 0.37)
    {
        full.advance(t);
        single.advance(t);
        full.values(t, x);
        REQUIRE(single.value(5, t) == x[5]);
    }
}

TEST_CASE("constant-rate single neuron is a Poisson process")
{
    ModelSpec spec;
    spec.rate = RateFunction::constant(1.5);
    std::vector<double> gaps;
    std::uint32_t r = 0;
    while (gaps.size() < 10000)
    {
        FiniteOptions fo;
        fo.replication = r++;
        auto const trains = spike_trains(simulate_finite(spec, 1, 10.0, SeedSpec{4, "poisson"}, fo));
        double prev = 0;
        // Only gaps starting before t = 2 (censoring at 10 is then negligible)
        for (double s : trains[0])
        {
            if (prev > 2.0)
            {
                break;
            }
            gaps.push_back(s - prev);
            prev = s;
        }
    }
    auto const ms = mean_se(gaps);
    CHECK(std::abs(ms.mean - 1 / 1.5) < 3 * ms.se);
}

TEST_CASE("spike counts respect the rate bound")
{
    ModelSpec spec;
    int const reps = 400;
    std::vector<double> counts;
    for (int r = 0; r < reps; ++r)
    {
        FiniteOptions fo;
        fo.replication = r;
        auto const traj = simulate_finite(spec, 16, 1.0, SeedSpec{5, "counts"}, fo);
        auto const c = spike_counts(traj, 1.0);
        counts.push_back(double(c[0]));
        CHECK(spike_counts(traj, 0.0) == std::vector<std::uint64_t>(16, 0));
    }
    auto const ms = mean_se(counts);
    CHECK(ms.mean <= spec.rate_bound() * 1.0 + 3 * ms.se);

    ModelSpec constant;
    constant.rate = RateFunction::constant(2.0);
    std::vector<double> k;
    for (int r = 0; r < reps; ++r)
    {
        FiniteOptions fo;
        fo.replication = r;
        auto const c = spike_counts(simulate_finite(constant, 4, 3.0, SeedSpec{5, "c2"}, fo), 3.0);
        for (auto v : c)
        {
            k.push_back(double(v));
        }
    }
    auto const mk = mean_se(k);
    CHECK(std::abs(mk.mean - 6.0) < 3 * mk.se);
}

TEST_CASE("empirical statistic")
{
    FiniteTrajectory const two(2, 1.0, 1.0, 1.0, {1.0, 3.0}, {});
    CHECK(empirical_statistic(two, 0.0, [](double x) { return x; }) == 2.0);
    ModelSpec spec;
    FiniteTrajectory const zeros(4, 1.0, 1.0, spec.rate_bound(), {0, 0, 0, 0}, {});
    auto const f = [&](double x) { return eval_rate(spec.rate, x); };
    CHECK(empirical_statistic(zeros, 0.5, f) == 3.0);
    auto const traj = simulate_finite(spec, 8, 2.0, SeedSpec{6, "stat"});
    for (double t : {0.3, 1.1, 2.0})
    {
        double const v = empirical_statistic(traj, t, f);
        CHECK(v >= spec.rate.inf_bound());
        CHECK(v <= spec.rate.sup_bound());
    }
}

TEST_CASE("small-jump martingale")
{
    FiniteTrajectory const quiet(3, 1.0, 1.0, 1.0, {0, 0, 0}, {});
    CHECK(small_jump_martingale(quiet, 1.0) == 0.0);

    ModelSpec spec;
    int const reps = 2000;
    std::vector<double> m(reps);
    for (int r = 0; r < reps; ++r)
    {
        FiniteOptions fo;
        fo.replication = r;
        m[r] = small_jump_martingale(simulate_finite(spec, 1024, 1.0, SeedSpec{7, "clt"}, fo), 1.0);
    }
    auto const ms = mean_se(m);
    double const sd = ms.se * std::sqrt(double(reps));
    std::sort(m.begin(), m.end());
    double ks = 0;
    for (int i = 0; i < reps; ++i)
    {
        double const p = normal_cdf((m[i] - ms.mean) / sd);
        ks = std::max({ks, std::abs(p - double(i) / reps), std::abs(p - double(i + 1) / reps)});
    }
    CHECK(ks < ks_critical(reps, 0.05));
}

TEST_CASE("finite system refuses models that violate its assumptions")
{
    ModelSpec spec;
    spec.mark_law = MarkLaw::discrete({1.0}, {1.0});
    CHECK_THROWS_AS(simulate_finite(spec, 4, 1.0, SeedSpec{}), AssumptionError);
    ModelSpec negative;
    negative.rate = RateFunction::arctan(1, 1);
    CHECK_THROWS_AS(simulate_finite(negative, 4, 1.0, SeedSpec{}), AssumptionError);
}

TEST_CASE("simulation is reproducible")
{
    ModelSpec spec;
    auto const a = simulate_finite(spec, 10, 2.0, SeedSpec{8, "det"});
    auto const b = simulate_finite(spec, 10, 2.0, SeedSpec{8, "det"});
    REQUIRE(a.events().size() == b.events().size());
    for (std::size_t k = 0; k < a.events().size(); ++k)
    {
        CHECK(a.events()[k].time == b.events()[k].time);
        CHECK(a.events()[k].pre_state == b.events()[k].pre_state);
    }
}
