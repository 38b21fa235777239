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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chaosmf/random.hpp"

namespace chaosmf {

//---------------------------------------------------------------------------//
// Rate function f
//---------------------------------------------------------------------------//
class RateFunction
{
public:
    struct Arctan
    {
        double c;
        double d;
    };
    struct Constant
    {
        double lambda;
    };
    //! Piecewise linear through (breakpoints, values), constant beyond the ends
    struct Table
    {
        std::vector<double> breakpoints;
        std::vector<double> values;
        double lipschitz;
    };

    static RateFunction arctan(double c, double d);
    static RateFunction constant(double lambda);
    //! Throws ValidationError unless breakpoints are strictly increasing
    static RateFunction table(std::vector<double> breakpoints, std::vector<double> values,
                              double lipschitz);

    double operator()(double x) const noexcept;

    //! ||f||_inf; finite for every supported kind
    double sup_bound() const noexcept { return sup_; }
    //! inf f (may be negative for ill-posed parameters)
    double inf_bound() const noexcept { return inf_; }
    //! Lipschitz constant: analytic for closed forms, declared for tables
    double lipschitz() const noexcept;
    //! True if f(x) < f(y) for all x < y
    bool strictly_increasing() const noexcept;

    std::string kind_name() const;
    auto const& kind() const noexcept { return kind_; }

private:
    using Kind = std::variant<Arctan, Constant, Table>;
    explicit RateFunction(Kind kind);

    Kind kind_;
    double sup_ = 0;
    double inf_ = 0;
};

//---------------------------------------------------------------------------//
// Mark law nu
//---------------------------------------------------------------------------//
//! Nodes and weights reproducing expectations under a law
struct QuadratureRule
{
    std::vector<double> points;
    std::vector<double> weights;
};

class MarkLaw
{
public:
    struct Rademacher
    {
        double h;
    };
    struct Uniform
    {
        double b;
    };
    struct Gaussian
    {
        double s;
    };
    struct Discrete
    {
        std::vector<double> points;
        std::vector<double> weights;
    };

    static MarkLaw rademacher(double h);
    static MarkLaw uniform(double b);
    static MarkLaw gaussian(double s);
    //! Weights must be nonnegative and sum to one (within 1e-12)
    static MarkLaw discrete(std::vector<double> points, std::vector<double> weights);

    double mean() const noexcept;
    //! sigma^2, always analytic
    double variance() const noexcept;
    double third_moment() const noexcept;

    double sample(NoiseStream& stream) const noexcept;

    /*!
     * Exact support for atomic laws; Gauss-Legendre (16 nodes) for uniform
     * and Gauss-Hermite (24 nodes) for gaussian marks.
     */
    QuadratureRule const& quadrature() const noexcept { return rule_; }

    std::string kind_name() const;
    auto const& kind() const noexcept { return kind_; }

private:
    using Kind = std::variant<Rademacher, Uniform, Gaussian, Discrete>;
    explicit MarkLaw(Kind kind);

    Kind kind_;
    QuadratureRule rule_;
    std::vector<double> cumulative_;
};

//---------------------------------------------------------------------------//
// Initial law nu_0
//---------------------------------------------------------------------------//
class InitialLaw
{
public:
    struct PointMass
    {
        double x0;
    };
    struct Uniform
    {
        double a;
        double b;
    };
    struct Gaussian
    {
        double m;
        double s;
    };

    static InitialLaw point_mass(double x0);
    static InitialLaw uniform(double a, double b);
    static InitialLaw gaussian(double m, double s);

    double mean() const noexcept;
    double second_moment() const noexcept;
    double sample(NoiseStream& stream) const noexcept;

    std::string kind_name() const;
    auto const& kind() const noexcept { return kind_; }

private:
    using Kind = std::variant<PointMass, Uniform, Gaussian>;
    explicit InitialLaw(Kind kind) : kind_(std::move(kind)) {}

    Kind kind_;
};

//---------------------------------------------------------------------------//
// Distance function a
//---------------------------------------------------------------------------//
class DistanceFunction
{
public:
    struct SameAsRate
    {
    };
    struct Table
    {
        std::vector<double> breakpoints;
        std::vector<double> values;
    };

    static DistanceFunction same_as_rate() { return DistanceFunction(SameAsRate{}); }
    static DistanceFunction table(std::vector<double> breakpoints, std::vector<double> values);

    bool is_same_as_rate() const noexcept { return std::holds_alternative<SameAsRate>(kind_); }
    std::string kind_name() const;
    auto const& kind() const noexcept { return kind_; }

private:
    using Kind = std::variant<SameAsRate, Table>;
    explicit DistanceFunction(Kind kind) : kind_(std::move(kind)) {}

    Kind kind_;
};

//---------------------------------------------------------------------------//
// Model
//---------------------------------------------------------------------------//
struct ModelSpec
{
    double alpha = 1.0;
    RateFunction rate = RateFunction::arctan(3.0, 1.0);
    MarkLaw mark_law = MarkLaw::rademacher(1.0);
    InitialLaw initial_law = InitialLaw::point_mass(0.0);
    DistanceFunction distance = DistanceFunction::same_as_rate();
    //! Accept inf f == 0 for limit-system solvers
    bool allow_zero_inf_rate = false;

    double sigma2() const noexcept { return mark_law.variance(); }
    double rate_bound() const noexcept { return rate.sup_bound(); }
};

struct AssumptionCheck
{
    std::string name;  // e.g. "Assumption 3"
    bool passed = false;
    //! "analytic" or "probe" (numerical evidence only)
    std::string method;
    std::string evidence;
};

struct AssumptionReport
{
    AssumptionCheck lipschitz;     // Assumption 1
    AssumptionCheck centered;      // Assumption 2
    AssumptionCheck contraction;   // Assumption 3

    //! Finite system needs Assumptions 1 and 2
    bool finite_system_ok() const noexcept { return lipschitz.passed && centered.passed; }
    //! Limit system additionally needs Assumption 3
    bool limit_system_ok() const noexcept { return finite_system_ok() && contraction.passed; }
    std::vector<std::string> failures() const;
    std::string summary() const;
};

struct ProbeOptions
{
    double lower = -20.0;
    double upper = 20.0;
    int points = 4001;
};

/*!
 * Check the standing assumptions.
 *
 * Closed-form kinds are checked analytically; tables are probed on a grid and
 * the result is reported as evidence. Malformed input throws ValidationError.
 */
AssumptionReport validate_model(ModelSpec const& spec, ProbeOptions const& probe = {});

//! Throw AssumptionError naming the failed assumptions
void require_finite_system(ModelSpec const& spec);
void require_limit_system(ModelSpec const& spec);

//! f(x), clamped to [inf f, sup f] to absorb rounding
double eval_rate(RateFunction const& rate, double x) noexcept;

/*!
 * a(x). A same-as-rate distance resolves through \p rate and throws
 * ValidationError when the rate is not strictly increasing.
 */
double eval_distance(DistanceFunction const& a, RateFunction const& rate, double x);

//! ||a||_inf
double distance_sup_bound(DistanceFunction const& a, RateFunction const& rate);

double sample_mark(MarkLaw const& law, NoiseStream& stream) noexcept;
double sample_initial(InitialLaw const& law, NoiseStream& stream) noexcept;

}  // namespace chaosmf
