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
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "chaosmf/errors.hpp"
#include "chaosmf/parallel.hpp"
#include "chaosmf/smooth.hpp"
#include "chaosmf/stats.hpp"

using namespace chaosmf;

TEST_CASE("mean and standard error")
{
    std::vector<double> const x{1, 2, 3, 4};
    auto const ms = mean_se(x);
    CHECK(ms.mean == 2.5);
    CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(ms.n == 4);
    CHECK_THROWS_AS(mean_se(std::vector<double>{}), std::invalid_argument);

    std::vector<double> const a{1, 2, 3}, b{1, 1, 1};
    auto const d = paired_difference(a, b, 2.0);
    CHECK(d.mean == doctest::Approx(0.0));
    CHECK(d.se == doctest::Approx(std::sqrt(1.0 / 3.0)));
    CHECK_THROWS_AS(paired_difference(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("correlation")
{
    std::vector<double> const x{1, 2, 3, 4, 5}, y{3, 5, 7, 9, 11}, c(5, 2.0);
    auto const r = correlation(x, y);
    CHECK(r.defined);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.se == doctest::Approx(0.0));
    CHECK_FALSE(correlation(x, c).defined);
    CHECK_THROWS_AS(correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    std::invalid_argument);
}

TEST_CASE("Kolmogorov-Smirnov")
{
    CHECK(ks_critical(100, 0.05) == doctest::Approx(0.13581).epsilon(1e-4));
    CHECK(ks_critical(1, 0.01) == doctest::Approx(1.62762).epsilon(1e-4));
    CHECK_THROWS_AS(ks_critical(10, 1.5), std::invalid_argument);
    int const n = 1000;
    std::vector<double> q;
    for (int i = 0; i < n; ++i)
    {
        q.push_back(-std::log(1 - (i + 0.5) / n) / 2.0);
    }
    CHECK(ks_exponential(q, 2.0) == doctest::Approx(0.5 / n));
    CHECK(ks_two_sample({1, 2, 3}, {3, 2, 1}) == 0.0);
    CHECK(ks_two_sample({1, 2}, {5, 6, 7}) == 1.0);
    CHECK(ks_critical_two_sample(100, 100, 0.05) == doctest::Approx(1.35810 * std::sqrt(0.02)).epsilon(1e-4));
}

TEST_CASE("Wasserstein-1 on empirical measures")
{
    using V = std::vector<double>;
    CHECK(wasserstein1(V{0}, V{1}) == 1.0);
    CHECK(wasserstein1(V{0, 1}, V{0, 1}) == 0.0);
    CHECK(wasserstein1(V{0, 2}, V{1}) == 1.0);
    CHECK(wasserstein1(V{0, 1}, V{0, 0.5, 1}) == doctest::Approx(1.0 / 6.0));
    CHECK(wasserstein1(V{0, 1, 2, 3}, V{0.5, 1.5, 2.5, 3.5}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(wasserstein1(V{1, 0}, V{0}), std::invalid_argument);
    CHECK_THROWS_AS(wasserstein1(V{}, V{0}), std::invalid_argument);
}

TEST_CASE("rate fit recovers an exact power law")
{
    std::vector<RatePoint> pts;
    for (double n : {32.0, 64.0, 128.0, 256.0, 512.0})
    {
        pts.push_back({n, 3.0 / std::sqrt(n), 0.01});
    }
    auto const fit = fit_rate(pts);
    REQUIRE(fit.fit);
    CHECK(fit.fit->slope == doctest::Approx(-0.5));
    CHECK(fit.fit->intercept == doctest::Approx(std::log(3.0)));
    CHECK(fit.fit->r2 == doctest::Approx(1.0));

    pts[2].estimate = 0;
    CHECK_FALSE(fit_rate(pts).fit);
    pts.resize(2);
    CHECK_THROWS_AS(fit_rate(pts), std::invalid_argument);
}

TEST_CASE("test-function jets match finite differences")
{
    std::vector<Smooth1D> const fns{Smooth1D::sin(), Smooth1D::cos(), Smooth1D::tanh(),
                                    Smooth1D::identity(), Smooth1D::constant(0.7),
                                    Smooth1D(Smooth1D::Kind::sin, 1.3, 0.8, 0.2),
                                    Smooth1D(Smooth1D::Kind::tanh, -0.5, 2.0, -0.1)};
    double const h = 1e-4;
    for (auto const& g : fns)
    {
        for (double x : {-1.7, -0.3, 0.0, 0.4, 2.2})
        {
            auto const j = g.jet(x);
            CHECK(j.v == doctest::Approx(g(x)));
            auto const jp = g.jet(x + h), jm = g.jet(x - h);
            CHECK(j.d1 == doctest::Approx((g(x + h) - g(x - h)) / (2 * h)).epsilon(1e-6));
            CHECK(j.d2 == doctest::Approx((jp.d1 - jm.d1) / (2 * h)).epsilon(1e-6));
            CHECK(j.d3 == doctest::Approx((jp.d2 - jm.d2) / (2 * h)).epsilon(1e-6));
        }
    }
}

TEST_CASE("test-function parsing")
{
    CHECK(Smooth1D::parse("sin")(0.5) == std::sin(0.5));
    CHECK(Smooth1D::parse("tanh")(0.5) == std::tanh(0.5));
    CHECK(Smooth1D::parse("identity")(0.5) == 0.5);
    CHECK(Smooth1D::parse("1.25").is_constant());
    CHECK(Smooth1D::parse("1.25")(9.0) == 1.25);
    CHECK_THROWS_AS(Smooth1D::parse("sinh"), ValidationError);
    CHECK_THROWS_AS(Smooth1D::parse("1.2x"), ValidationError);
    TestFunctionSet set;
    CHECK_FALSE(set.phi_constant());
    set.phi = {{Smooth1D::constant(1), Smooth1D::constant(2)}};
    CHECK(set.phi_constant());
}

TEST_CASE("parallel map keeps index order and rethrows")
{
    for (unsigned threads : {1u, 2u, 7u})
    {
        auto const out = parallel_map(100, threads, [](std::size_t i) { return i * i; });
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            CHECK(out[i] == i * i);
        }
        CHECK_THROWS_AS(parallel_map(50, threads,
                                     [](std::size_t i) -> int {
                                         if (i == 17)
                                         {
                                             throw std::runtime_error("task");
                                         }
                                         return 0;
                                     }),
                        std::runtime_error);
    }
    CHECK(resolve_threads(3) == 3);
    ::setenv("CHAOSMF_THREADS", "5", 1);
    CHECK(resolve_threads(0) == 5);
    ::setenv("CHAOSMF_THREADS", "bogus", 1);
    CHECK(resolve_threads(0) == 1);
    ::unsetenv("CHAOSMF_THREADS");
    CHECK(resolve_threads(-1) == 1);
}
