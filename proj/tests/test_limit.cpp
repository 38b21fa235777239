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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "chaosmf/errors.hpp"
#include "chaosmf/limit_system.hpp"
#include "chaosmf/stats.hpp"

using namespace chaosmf;

namespace {

ModelSpec constant_rate(double lambda)
{
    ModelSpec spec;
    spec.rate = RateFunction::constant(lambda);
    spec.distance = DistanceFunction::table({-1.0, 1.0}, {-1.0, 1.0});
    return spec;
}

}  // namespace

TEST_CASE("grid")
{
    GridSpec g{1.0, 0.3, true};
    auto const t = g.times();
    CHECK(t == std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0});
    CHECK(GridSpec{1.0, 0.25, true}.times().size() == 5);
    CHECK_THROWS_AS((GridSpec{0.0, 0.1, true}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{1.0, 0.0, true}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((GridSpec{1.0, 2.0, true}.validate()), std::invalid_argument);
}

TEST_CASE("step function is left-continuous")
{
    StepFunction const s{{0.0, 1.0, 2.0}, {5.0, 6.0, 7.0}};
    CHECK(s(-1.0) == 5.0);
    CHECK(s(0.0) == 5.0);
    CHECK(s(0.5) == 5.0);
    CHECK(s(1.0) == 5.0);
    CHECK(s(1.5) == 6.0);
    CHECK(s(2.0) == 6.0);
    CHECK_THROWS_AS(StepFunction{}(0.0), std::logic_error);
}

TEST_CASE("constant rate gives a constant coefficient")
{
    auto const spec = constant_rate(2.0);
    auto const traj = simulate_mean_field(spec, 256, GridSpec{1.0, 0.01, true}, SeedSpec{1, "c"});
    for (double v : traj.mu_f)
    {
        CHECK(v == 2.0);
    }
    auto const path = mu_f_path(traj);
    CHECK(path(0.37) == 2.0);
}

TEST_CASE("mean without common noise solves the linear ODE")
{
    for (bool adapted : {true, false})
    {
        auto spec = constant_rate(1.0);
        spec.mark_law = MarkLaw::discrete({0.0}, {1.0});
        spec.initial_law = InitialLaw::point_mass(1.0);
        GridSpec const grid{1.0, 0.01, adapted};
        auto const traj = simulate_mean_field(spec, 20000, grid, SeedSpec{2, "ode"});
        auto const& x = traj.states.back();
        auto const ms = mean_se(x);
        double const expected = std::exp(-(spec.alpha + 1.0));
        // Exact decay between jumps, reset to exactly 0 after
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            if (traj.jumps[i].empty())
            {
                CHECK(x[i] == doctest::Approx(std::exp(-spec.alpha)).epsilon(1e-12));
            }
            else
            {
                CHECK(x[i] == 0.0);
            }
        }
        CHECK(std::abs(ms.mean - expected) < 3 * ms.se + (adapted ? 0.0 : grid.dt));
    }
}

TEST_CASE("frozen-coefficient increment has the exact OU variance")
{
    auto spec = constant_rate(0.5);
    double const dt = 0.5;
    GridSpec const grid{dt, dt, true};
    std::vector<double> x;
    for (std::uint32_t r = 0; x.size() < 200000; ++r)
    {
        auto const bm = shared_brownian(SeedSpec{3, "ou"}, r, grid);
        EnsembleSetup setup;
        setup.spec = &spec;
        setup.grid = grid;
        setup.seed = SeedSpec{3, "ou"};
        setup.replication = r;
        setup.brownian = &bm;
        setup.record_jumps = true;
        double last = 0;
        auto const res = run_ensemble(setup, [&](std::size_t, double, std::span<double const> s, double) {
            last = s[0];
        });
        if (res.jumps[0].empty())
        {
            x.push_back(last);
        }
    }
    auto const ms = mean_se(x);
    double var = 0;
    for (double v : x)
    {
        var += (v - ms.mean) * (v - ms.mean);
    }
    var /= double(x.size() - 1);
    double const expected = spec.sigma2() * 0.5 * -std::expm1(-2 * spec.alpha * dt) / (2 * spec.alpha);
    CHECK(var == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("particles share one Brownian path")
{
    auto spec = constant_rate(1e-9);
    auto const traj = simulate_mean_field(spec, 64, GridSpec{1.0, 0.05, true}, SeedSpec{4, "w"});
    for (auto const& row : traj.states)
    {
        for (double v : row)
        {
            CHECK(v == row.front());
        }
    }
    CHECK(traj.states.back().front() != 0.0);
}

TEST_CASE("coefficient stays within the range of the rate")
{
    ModelSpec spec;
    spec.initial_law = InitialLaw::gaussian(0.0, 2.0);
    auto const traj = simulate_mean_field(spec, 512, GridSpec{2.0, 0.02, true}, SeedSpec{5, "r"});
    for (double v : traj.mu_f)
    {
        CHECK(v >= spec.rate.inf_bound());
        CHECK(v <= spec.rate.sup_bound());
    }
}

TEST_CASE("particle slices are coupled to the full ensemble")
{
    auto spec = constant_rate(1.5);
    GridSpec const grid{1.0, 0.05, true};
    auto const bm = shared_brownian(SeedSpec{6, "slice"}, 0, grid);
    EnsembleSetup setup;
    setup.spec = &spec;
    setup.particles = 32;
    setup.grid = grid;
    setup.seed = SeedSpec{6, "slice"};
    setup.brownian = &bm;
    std::vector<double> full, part;
    run_ensemble(setup, [&](std::size_t, double, std::span<double const> s, double) {
        full.assign(s.begin(), s.end());
    });
    setup.particles = 8;
    setup.first_index = 10;
    run_ensemble(setup, [&](std::size_t, double, std::span<double const> s, double) {
        part.assign(s.begin(), s.end());
    });
    for (std::size_t i = 0; i < 8; ++i)
    {
        CHECK(part[i] == full[10 + i]);
    }
}

TEST_CASE("marginal at time zero is the initial law")
{
    ModelSpec spec;
    spec.initial_law = InitialLaw::uniform(2.0, 3.0);
    auto const x = sample_limit_marginal(spec, 1000, GridSpec{1.0, 0.1, true}, 0.0, SeedSpec{7, "m"});
    for (double v : x)
    {
        CHECK(v >= 2.0);
        CHECK(v <= 3.0);
    }
    CHECK_THROWS_AS(sample_limit_marginal(spec, 10, GridSpec{1.0, 0.1, true}, 1.5, SeedSpec{}),
                    std::out_of_range);
}

TEST_CASE("coefficient path fluctuates with the common noise")
{
    ModelSpec spec;
    std::vector<double> v;
    for (std::uint32_t r = 0; r < 40; ++r)
    {
        MeanFieldOptions mo;
        mo.replication = r;
        mo.store_states = false;
        auto const traj = simulate_mean_field(spec, 4096, GridSpec{1.0, 0.01, true}, SeedSpec{8, "v"}, mo);
        v.push_back(traj.mu_f.back());
    }
    auto const ms = mean_se(v);
    double var = 0;
    std::vector<double> sq;
    for (double x : v)
    {
        sq.push_back((x - ms.mean) * (x - ms.mean));
    }
    auto const vs = mean_se(sq);
    CHECK(vs.mean > 5 * vs.se);
    (void)var;
}

TEST_CASE("Picard iteration")
{
    GridSpec const grid{0.25, 1e-3, true};
    SeedSpec const seed{9, "picard"};
    auto const bm = shared_brownian(seed, 0, grid);
    PicardOptions po;
    po.replications = 200;
    po.max_iter = 4;
    po.tol = 1e-12;

    ModelSpec spec;
    auto const res = picard_solve(spec, bm, grid, seed, po);
    REQUIRE(res.iterates.size() == std::size_t(res.iterations) + 1);
    auto const& mu0 = res.iterates[0].mu_f;
    for (double v : mu0)
    {
        CHECK(v == mu0.front());
    }
    for (std::size_t n = 1; n < res.delta.size(); ++n)
    {
        CHECK(res.delta[n] <= 0.75 * res.delta[n - 1]);
    }

    auto const control = picard_solve(constant_rate(2.0), bm, grid, seed, po);
    REQUIRE(control.delta.size() >= 2);
    CHECK(control.delta[1] == 0.0);
    CHECK(control.converged);

    po.tol = 0;
    CHECK_THROWS_AS(picard_solve(spec, bm, grid, seed, po), std::invalid_argument);
}

TEST_CASE("limit system refuses rates with zero infimum unless allowed")
{
    ModelSpec spec;
    spec.rate = RateFunction::arctan(std::numbers::pi / 2, 1.0);
    GridSpec const grid{0.5, 0.05, true};
    CHECK_THROWS_AS(simulate_mean_field(spec, 16, grid, SeedSpec{}), AssumptionError);
    spec.allow_zero_inf_rate = true;
    CHECK_NOTHROW(simulate_mean_field(spec, 16, grid, SeedSpec{}));
}
