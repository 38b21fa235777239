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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace chaosmf {

struct MeanSE
{
    double mean = 0;
    double se = 0;
    std::size_t n = 0;
};

//! Sample mean and standard error (unbiased variance); n >= 1
MeanSE mean_se(std::span<double const> x);

//! Sample mean of x minus c y and its standard error (paired samples)
MeanSE paired_difference(std::span<double const> x, std::span<double const> y, double c = 1.0);

struct Correlation
{
    bool defined = false;
    double value = 0;
    //! Large-sample standard error sqrt((1 - r^2) / (n - 2))
    double se = 0;
    std::size_t n = 0;
};

Correlation correlation(std::span<double const> x, std::span<double const> y);

//! sup |F_n - F| against exponential(rate)
double ks_exponential(std::vector<double> samples, double rate);

//! Two-sample Kolmogorov-Smirnov statistic
double ks_two_sample(std::vector<double> a, std::vector<double> b);

//! Asymptotic one-sample KS critical value c(level) / sqrt(n)
double ks_critical(std::size_t n, double level);

//! Asymptotic two-sample KS critical value
double ks_critical_two_sample(std::size_t n, std::size_t m, double level);

//! Exact 1-Wasserstein distance between empirical measures of sorted samples
double wasserstein1(std::span<double const> a, std::span<double const> b);

//---------------------------------------------------------------------------//
struct RatePoint
{
    double size = 0;
    double estimate = 0;
    double se = 0;
};

struct LineFit
{
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
};

struct RateFit
{
    std::vector<RatePoint> points;
    //! Absent when some estimate is not strictly positive
    std::optional<LineFit> fit;
};

//! Least squares of log(estimate) on log(size); requires at least 3 points
RateFit fit_rate(std::vector<RatePoint> points);

}  // namespace chaosmf
