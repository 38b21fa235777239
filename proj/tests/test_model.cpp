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
#include <vector>

#include "chaosmf/errors.hpp"
#include "chaosmf/model.hpp"

using namespace chaosmf;
using std::numbers::pi;

TEST_CASE("arctan rate: values, bounds and monotonicity")
{
    auto const f = RateFunction::arctan(3, 1);
    CHECK(eval_rate(f, 0.0) == 3.0);
    CHECK(f.sup_bound() == doctest::Approx(3 + pi / 2));
    CHECK(f.inf_bound() == doctest::Approx(3 - pi / 2));
    CHECK(eval_rate(f, 1e12) == doctest::Approx(3 + pi / 2));
    CHECK(f.lipschitz() == 1.0);
    CHECK(f.strictly_increasing());

    auto s = derive_stream(SeedSpec{1, "lip"}, StreamRole::aux(0));
    for (int i = 0; i < 10000; ++i)
    {
        double const x = 20 * s.uniform() - 10;
        double const y = x + 5 * s.uniform();
        REQUIRE(eval_rate(f, x) <= eval_rate(f, y));
        REQUIRE(std::abs(eval_rate(f, y) - eval_rate(f, x)) <= (y - x) + 1e-15);
    }
}

TEST_CASE("constant and table rates")
{
    CHECK(eval_rate(RateFunction::constant(2), -5.0) == 2.0);
    CHECK_FALSE(RateFunction::constant(2).strictly_increasing());

    auto const t = RateFunction::table({-1, 0, 2}, {1, 2, 3}, 1.0);
    CHECK(eval_rate(t, -5.0) == 1.0);
    CHECK(eval_rate(t, -0.5) == doctest::Approx(1.5));
    CHECK(eval_rate(t, 1.0) == doctest::Approx(2.5));
    CHECK(eval_rate(t, 9.0) == 3.0);
    CHECK(t.sup_bound() == 3.0);
    CHECK(t.inf_bound() == 1.0);
    CHECK_THROWS_AS(RateFunction::table({0, 0}, {1, 2}, 1), ValidationError);
    CHECK_THROWS_AS(RateFunction::table({1, 0}, {1, 2}, 1), ValidationError);
    CHECK_THROWS_AS(RateFunction::table({0, 1}, {1}, 1), ValidationError);
}

TEST_CASE("assumption checks")
{
    ModelSpec spec;
    auto const good = validate_model(spec);
    CHECK(good.lipschitz.passed);
    CHECK(good.centered.passed);
    CHECK(good.contraction.passed);
    CHECK(good.contraction.method == "analytic");
    CHECK(good.limit_system_ok());

    spec.rate = RateFunction::arctan(1, 1);
    auto const bad = validate_model(spec);
    CHECK_FALSE(bad.contraction.passed);
    CHECK(bad.contraction.name == "Assumption 3");
    try
    {
        require_limit_system(spec);
        FAIL("expected an assumption failure");
    }
    catch (AssumptionError const& e)
    {
        CHECK(std::string(e.what()).find("Assumption 3") != std::string::npos);
    }

    ModelSpec shifted;
    shifted.mark_law = MarkLaw::discrete({1.0}, {1.0});
    auto const off = validate_model(shifted);
    CHECK_FALSE(off.centered.passed);
    CHECK(off.centered.name == "Assumption 2");
    CHECK_FALSE(off.finite_system_ok());
    CHECK_THROWS_AS(require_finite_system(shifted), AssumptionError);

    ModelSpec table;
    table.rate = RateFunction::table({-2, 2}, {1, 3}, 0.5);
    table.distance = DistanceFunction::table({-2, 2}, {-1, 1});
    auto const probed = validate_model(table);
    CHECK(probed.contraction.method == "probe");
    CHECK(probed.contraction.passed);

    CHECK(validate_model(spec).summary() == validate_model(spec).summary());
    ModelSpec negative;
    negative.alpha = -1;
    CHECK_THROWS_AS(validate_model(negative), ValidationError);
}

TEST_CASE("distance function")
{
    auto const f = RateFunction::arctan(3, 1);
    auto const same = DistanceFunction::same_as_rate();
    CHECK(eval_distance(same, f, 0.0) == 3.0);
    CHECK(eval_distance(same, f, 1.0) == doctest::Approx(3 + pi / 4));
    CHECK_THROWS_AS(eval_distance(same, RateFunction::constant(2), 0.0), ValidationError);
    CHECK_THROWS_AS(DistanceFunction::table({0, 1}, {1, 1}), ValidationError);
    auto const t = DistanceFunction::table({0, 1}, {0, 2});
    CHECK(eval_distance(t, RateFunction::constant(2), 0.5) == doctest::Approx(1.0));
}

TEST_CASE("mark laws: support, moments and quadrature")
{
    auto s = derive_stream(SeedSpec{2, "marks"}, StreamRole::aux(0));
    auto const rad = MarkLaw::rademacher(1);
    std::size_t const n = 1000000;
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const u = sample_mark(rad, s);
        REQUIRE((u == 1.0 || u == -1.0));
        sum += u;
    }
    CHECK(std::abs(sum / n) < 3e-3);

    auto const uni = MarkLaw::uniform(2);
    double s2 = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const u = sample_mark(uni, s);
        s2 += u * u;
    }
    CHECK(s2 / n == doctest::Approx(4.0 / 3).epsilon(0.01));
    CHECK(uni.variance() == doctest::Approx(4.0 / 3));

    auto const skew = MarkLaw::discrete({-1, 2}, {2.0 / 3, 1.0 / 3});
    CHECK(skew.mean() == doctest::Approx(0).epsilon(1e-15));
    CHECK(skew.variance() == doctest::Approx(2));
    CHECK(skew.third_moment() == doctest::Approx(2));
    CHECK_THROWS_AS(MarkLaw::discrete({0, 1}, {0.5, 0.6}), ValidationError);

    // Quadrature must reproduce polynomial moments of each law
    struct Case
    {
        MarkLaw law;
        double m2, m4;
    };
    for (auto const& c : {Case{MarkLaw::rademacher(0.5), 0.25, 0.0625},
                          Case{MarkLaw::uniform(3), 3.0, 81.0 / 5},
                          Case{MarkLaw::gaussian(2), 4.0, 48.0},
                          Case{skew, 2.0, 6.0}})
    {
        auto const& q = c.law.quadrature();
        double w = 0, m1 = 0, m2 = 0, m4 = 0;
        for (std::size_t k = 0; k < q.points.size(); ++k)
        {
            double const u = q.points[k];
            w += q.weights[k];
            m1 += q.weights[k] * u;
            m2 += q.weights[k] * u * u;
            m4 += q.weights[k] * u * u * u * u;
        }
        CHECK(w == doctest::Approx(1).epsilon(1e-13));
        CHECK(std::abs(m1) < 1e-13);
        CHECK(m2 == doctest::Approx(c.m2).epsilon(1e-12));
        CHECK(m4 == doctest::Approx(c.m4).epsilon(1e-12));
    }
}

TEST_CASE("initial laws")
{
    auto s = derive_stream(SeedSpec{3, "init"}, StreamRole::aux(0));
    auto const point = InitialLaw::point_mass(0);
    for (int i = 0; i < 100; ++i)
    {
        REQUIRE(sample_initial(point, s) == 0.0);
    }
    auto const uni = InitialLaw::uniform(0, 2);
    for (int i = 0; i < 10000; ++i)
    {
        double const x = sample_initial(uni, s);
        REQUIRE(x >= 0.0);
        REQUIRE(x <= 2.0);
    }
    auto const gauss = InitialLaw::gaussian(0, 1);
    std::size_t const n = 1000000;
    double s2 = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        double const x = sample_initial(gauss, s);
        s2 += x * x;
    }
    CHECK(s2 / n == doctest::Approx(1).epsilon(0.01));
    CHECK(uni.second_moment() == doctest::Approx(4.0 / 3));
}

TEST_CASE("mark sample means stay within four standard errors")
{
    int failures = 0;
    int const suites = 200;
    for (int r = 0; r < suites; ++r)
    {
        auto s = derive_stream(SeedSpec{4, "suite"}, StreamRole::aux(0, r));
        for (auto const& law : {MarkLaw::rademacher(1), MarkLaw::uniform(1), MarkLaw::gaussian(1)})
        {
            int const n = 2000;
            double sum = 0;
            for (int i = 0; i < n; ++i)
            {
                sum += sample_mark(law, s);
            }
            failures += std::abs(sum / n) > 4 * std::sqrt(law.variance() / n);
        }
    }
    CHECK(failures < 0.01 * 3 * suites);
}
