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

#include "chaosmf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chaosmf {
namespace {

double ks_coefficient(double level)
{
    if (!(level > 0 && level < 1))
    {
        throw std::invalid_argument("KS level must be in (0, 1)");
    }
    return std::sqrt(-0.5 * std::log(level / 2));
}

}  // namespace

MeanSE mean_se(std::span<double const> x)
{
    if (x.empty())
    {
        throw std::invalid_argument("mean_se: empty sample");
    }
    double const n = static_cast<double>(x.size());
    double sum = 0;
    for (double v : x)
    {
        sum += v;
    }
    double const mean = sum / n;
    double ss = 0;
    for (double v : x)
    {
        ss += (v - mean) * (v - mean);
    }
    double const se = x.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return {mean, se, x.size()};
}

MeanSE paired_difference(std::span<double const> x, std::span<double const> y, double c)
{
    if (x.size() != y.size())
    {
        throw std::invalid_argument("paired_difference: size mismatch");
    }
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        d[i] = x[i] - c * y[i];
    }
    return mean_se(d);
}

Correlation correlation(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size() || x.size() < 3)
    {
        throw std::invalid_argument("correlation: need equal sizes of at least 3");
    }
    Correlation out;
    out.n = x.size();
    double const mx = mean_se(x).mean;
    double const my = mean_se(y).mean;
    double sxx = 0;
    double syy = 0;
    double sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0) || !(syy > 0))
    {
        return out;
    }
    out.defined = true;
    out.value = sxy / std::sqrt(sxx * syy);
    out.se = std::sqrt(std::max(0.0, 1 - out.value * out.value) / (static_cast<double>(out.n) - 2));
    return out;
}

double ks_exponential(std::vector<double> samples, double rate)
{
    if (samples.empty() || !(rate > 0))
    {
        throw std::invalid_argument("ks_exponential: need samples and a positive rate");
    }
    std::sort(samples.begin(), samples.end());
    double const n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        double const cdf = -std::expm1(-rate * std::max(samples[i], 0.0));
        d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
    {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        double const v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v)
        {
            ++i;
        }
        while (j < b.size() && b[j] == v)
        {
            ++j;
        }
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double ks_critical(std::size_t n, double level)
{
    return ks_coefficient(level) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(std::size_t n, std::size_t m, double level)
{
    double const nn = static_cast<double>(n);
    double const mm = static_cast<double>(m);
    return ks_coefficient(level) * std::sqrt((nn + mm) / (nn * mm));
}

double wasserstein1(std::span<double const> a, std::span<double const> b)
{
    if (a.empty() || b.empty())
    {
        throw std::invalid_argument("wasserstein1: empty sample");
    }
    if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
    {
        throw std::invalid_argument("wasserstein1: samples must be sorted");
    }
    if (a.size() == b.size())
    {
        double sum = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            sum += std::abs(a[i] - b[i]);
        }
        return sum / static_cast<double>(a.size());
    }
    // Integrate |F^-1 - G^-1| over the merged quantile breakpoints
    double const na = static_cast<double>(a.size());
    double const nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double level = 0;
    double sum = 0;
    while (i < a.size() && j < b.size())
    {
        double const next_a = (i + 1) / na;
        double const next_b = (j + 1) / nb;
        double const next = std::min(next_a, next_b);
        sum += (next - level) * std::abs(a[i] - b[j]);
        level = next;
        if (next_a <= next)
        {
            ++i;
        }
        if (next_b <= next)
        {
            ++j;
        }
    }
    return sum;
}

RateFit fit_rate(std::vector<RatePoint> points)
{
    if (points.size() < 3)
    {
        throw std::invalid_argument("fit_rate: need at least 3 sizes");
    }
    RateFit out;
    out.points = std::move(points);
    for (auto const& p : out.points)
    {
        if (!(p.estimate > 0) || !(p.size > 0))
        {
            return out;
        }
    }
    double const n = static_cast<double>(out.points.size());
    double sx = 0;
    double sy = 0;
    for (auto const& p : out.points)
    {
        sx += std::log(p.size);
        sy += std::log(p.estimate);
    }
    double const mx = sx / n;
    double const my = sy / n;
    double sxx = 0;
    double sxy = 0;
    double syy = 0;
    for (auto const& p : out.points)
    {
        double const dx = std::log(p.size) - mx;
        double const dy = std::log(p.estimate) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0))
    {
        throw std::invalid_argument("fit_rate: sizes must not all be equal");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    out.fit = fit;
    return out;
}

}  // namespace chaosmf
