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

#include "chaosmf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "chaosmf/errors.hpp"

namespace chaosmf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kLegendreNodes = 16;
constexpr int kHermiteNodes = 24;

template<class... Ts>
struct Overload : Ts...
{
    using Ts::operator()...;
};
template<class... Ts>
Overload(Ts...) -> Overload<Ts...>;

void require_finite(double value, char const* what)
{
    if (!std::isfinite(value))
    {
        throw ValidationError(std::string(what) + " must be finite");
    }
}

void check_table(std::vector<double> const& x, std::vector<double> const& y, char const* what)
{
    if (x.empty() || x.size() != y.size())
    {
        throw ValidationError(std::string(what)
                              + ": breakpoints and values must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        require_finite(x[i], what);
        require_finite(y[i], what);
        if (i > 0 && !(x[i] > x[i - 1]))
        {
            throw ValidationError(std::string(what) + ": breakpoints must be strictly increasing");
        }
    }
}

// Piecewise linear interpolation, constant beyond the end points
double interpolate(std::vector<double> const& x, std::vector<double> const& y, double at) noexcept
{
    if (std::isnan(at))
    {
        return y.front();
    }
    if (at <= x.front())
    {
        return y.front();
    }
    if (at >= x.back())
    {
        return y.back();
    }
    auto const hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), at) - x.begin());
    std::size_t const lo = hi - 1;
    double const w = (at - x[lo]) / (x[hi] - x[lo]);
    return y[lo] + w * (y[hi] - y[lo]);
}

double max_slope(std::vector<double> const& x, std::vector<double> const& y) noexcept
{
    double slope = 0;
    for (std::size_t i = 1; i < x.size(); ++i)
    {
        slope = std::max(slope, std::abs(y[i] - y[i - 1]) / (x[i] - x[i - 1]));
    }
    return slope;
}

bool strictly_increasing_values(std::vector<double> const& y) noexcept
{
    if (y.size() < 2)
    {
        return false;
    }
    for (std::size_t i = 1; i < y.size(); ++i)
    {
        if (!(y[i] > y[i - 1]))
        {
            return false;
        }
    }
    return true;
}

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights the
// squared first eigenvector components (normalized to a probability law).
QuadratureRule golub_welsch(int n, double (*offdiag)(int))
{
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k)
    {
        jacobi(k, k - 1) = jacobi(k - 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    double total = 0;
    for (int i = 0; i < n; ++i)
    {
        rule.points[i] = solver.eigenvalues()(i);
        double const v = solver.eigenvectors()(0, i);
        rule.weights[i] = v * v;
        total += rule.weights[i];
    }
    for (auto& w : rule.weights)
    {
        w /= total;
    }
    // Enforce exact symmetry of the rule
    for (int i = 0; i < n / 2; ++i)
    {
        double const p = 0.5 * (rule.points[n - 1 - i] - rule.points[i]);
        double const w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.points[i] = -p;
        rule.points[n - 1 - i] = p;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
    {
        rule.points[n / 2] = 0.0;
    }
    return rule;
}

QuadratureRule const& legendre_rule()
{
    static QuadratureRule const rule = golub_welsch(
        kLegendreNodes, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); });
    return rule;
}

QuadratureRule const& hermite_rule()
{
    static QuadratureRule const rule
        = golub_welsch(kHermiteNodes, [](int k) { return std::sqrt(static_cast<double>(k)); });
    return rule;
}

QuadratureRule scaled(QuadratureRule rule, double factor)
{
    for (auto& p : rule.points)
    {
        p *= factor;
    }
    return rule;
}

std::string format_double(double value)
{
    std::ostringstream os;
    os.precision(6);
    os << value;
    return os.str();
}

}  // namespace

//---------------------------------------------------------------------------//
// RateFunction
//---------------------------------------------------------------------------//
RateFunction::RateFunction(Kind kind) : kind_(std::move(kind))
{
    std::visit(Overload{
                   [this](Arctan const& a) {
                       double const half = std::abs(a.d) * kPi / 2;
                       sup_ = a.c + half;
                       inf_ = a.c - half;
                   },
                   [this](Constant const& k) { sup_ = inf_ = k.lambda; },
                   [this](Table const& t) {
                       auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
                       inf_ = *lo;
                       sup_ = *hi;
                   },
               },
               kind_);
}

RateFunction RateFunction::arctan(double c, double d)
{
    require_finite(c, "arctan rate c");
    require_finite(d, "arctan rate d");
    return RateFunction(Arctan{c, d});
}

RateFunction RateFunction::constant(double lambda)
{
    require_finite(lambda, "constant rate lambda");
    return RateFunction(Constant{lambda});
}

RateFunction RateFunction::table(std::vector<double> breakpoints, std::vector<double> values,
                                 double lipschitz)
{
    check_table(breakpoints, values, "rate table");
    if (!std::isfinite(lipschitz) || lipschitz < 0)
    {
        throw ValidationError("rate table: lipschitz constant must be finite and nonnegative");
    }
    return RateFunction(Table{std::move(breakpoints), std::move(values), lipschitz});
}

double RateFunction::operator()(double x) const noexcept
{
    return eval_rate(*this, x);
}

double RateFunction::lipschitz() const noexcept
{
    return std::visit(Overload{
                          [](Arctan const& a) { return std::abs(a.d); },
                          [](Constant const&) { return 0.0; },
                          [](Table const& t) { return t.lipschitz; },
                      },
                      kind_);
}

bool RateFunction::strictly_increasing() const noexcept
{
    return std::visit(Overload{
                          [](Arctan const& a) { return a.d > 0; },
                          [](Constant const&) { return false; },
                          [](Table const& t) { return strictly_increasing_values(t.values); },
                      },
                      kind_);
}

std::string RateFunction::kind_name() const
{
    static char const* const names[] = {"arctan", "constant", "table"};
    return names[kind_.index()];
}

double eval_rate(RateFunction const& rate, double x) noexcept
{
    double const raw = std::visit(
        Overload{
            [x](RateFunction::Arctan const& a) { return a.c + a.d * std::atan(x); },
            [](RateFunction::Constant const& k) { return k.lambda; },
            [x](RateFunction::Table const& t) { return interpolate(t.breakpoints, t.values, x); },
        },
        rate.kind());
    return std::clamp(raw, rate.inf_bound(), rate.sup_bound());
}

//---------------------------------------------------------------------------//
// MarkLaw
//---------------------------------------------------------------------------//
MarkLaw::MarkLaw(Kind kind) : kind_(std::move(kind))
{
    std::visit(Overload{
                   [this](Rademacher const& r) { rule_ = {{-r.h, r.h}, {0.5, 0.5}}; },
                   [this](Uniform const& u) { rule_ = scaled(legendre_rule(), u.b); },
                   [this](Gaussian const& g) { rule_ = scaled(hermite_rule(), g.s); },
                   [this](Discrete const& d) {
                       rule_ = {d.points, d.weights};
                       cumulative_.resize(d.weights.size());
                       std::partial_sum(d.weights.begin(), d.weights.end(), cumulative_.begin());
                       cumulative_.back() = 1.0;
                   },
               },
               kind_);
}

MarkLaw MarkLaw::rademacher(double h)
{
    require_finite(h, "rademacher h");
    return MarkLaw(Rademacher{h});
}

MarkLaw MarkLaw::uniform(double b)
{
    require_finite(b, "uniform mark b");
    if (b < 0)
    {
        throw ValidationError("uniform mark b must be nonnegative");
    }
    return MarkLaw(Uniform{b});
}

MarkLaw MarkLaw::gaussian(double s)
{
    require_finite(s, "gaussian mark s");
    if (s < 0)
    {
        throw ValidationError("gaussian mark s must be nonnegative");
    }
    return MarkLaw(Gaussian{s});
}

MarkLaw MarkLaw::discrete(std::vector<double> points, std::vector<double> weights)
{
    if (points.empty() || points.size() != weights.size())
    {
        throw ValidationError("discrete mark: points and weights must be nonempty and of equal length");
    }
    double total = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        require_finite(points[i], "discrete mark point");
        if (!std::isfinite(weights[i]) || weights[i] < 0)
        {
            throw ValidationError("discrete mark: weights must be finite and nonnegative");
        }
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
    {
        throw ValidationError("discrete mark: weights must sum to 1");
    }
    return MarkLaw(Discrete{std::move(points), std::move(weights)});
}

double MarkLaw::mean() const noexcept
{
    if (auto const* d = std::get_if<Discrete>(&kind_))
    {
        return std::inner_product(d->points.begin(), d->points.end(), d->weights.begin(), 0.0);
    }
    return 0.0;
}

double MarkLaw::variance() const noexcept
{
    return std::visit(Overload{
                          [](Rademacher const& r) { return r.h * r.h; },
                          [](Uniform const& u) { return u.b * u.b / 3.0; },
                          [](Gaussian const& g) { return g.s * g.s; },
                          [](Discrete const& d) {
                              double m1 = 0;
                              double m2 = 0;
                              for (std::size_t i = 0; i < d.points.size(); ++i)
                              {
                                  m1 += d.weights[i] * d.points[i];
                                  m2 += d.weights[i] * d.points[i] * d.points[i];
                              }
                              return std::max(0.0, m2 - m1 * m1);
                          },
                      },
                      kind_);
}

double MarkLaw::third_moment() const noexcept
{
    if (auto const* d = std::get_if<Discrete>(&kind_))
    {
        double m3 = 0;
        for (std::size_t i = 0; i < d->points.size(); ++i)
        {
            m3 += d->weights[i] * d->points[i] * d->points[i] * d->points[i];
        }
        return m3;
    }
    return 0.0;
}

double MarkLaw::sample(NoiseStream& stream) const noexcept
{
    return std::visit(Overload{
                          [&](Rademacher const& r) { return (stream.next_u32() & 1u) ? r.h : -r.h; },
                          [&](Uniform const& u) { return u.b * (2.0 * stream.uniform() - 1.0); },
                          [&](Gaussian const& g) { return g.s * stream.normal(); },
                          [&](Discrete const& d) {
                              double const v = stream.uniform();
                              auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), v);
                              auto idx = static_cast<std::size_t>(it - cumulative_.begin());
                              return d.points[std::min(idx, d.points.size() - 1)];
                          },
                      },
                      kind_);
}

std::string MarkLaw::kind_name() const
{
    static char const* const names[] = {"rademacher", "uniform", "gaussian", "discrete"};
    return names[kind_.index()];
}

double sample_mark(MarkLaw const& law, NoiseStream& stream) noexcept
{
    return law.sample(stream);
}

//---------------------------------------------------------------------------//
// InitialLaw
//---------------------------------------------------------------------------//
InitialLaw InitialLaw::point_mass(double x0)
{
    require_finite(x0, "initial point x0");
    return InitialLaw(PointMass{x0});
}

InitialLaw InitialLaw::uniform(double a, double b)
{
    require_finite(a, "initial uniform a");
    require_finite(b, "initial uniform b");
    if (!(a <= b))
    {
        throw ValidationError("initial uniform requires a <= b");
    }
    return InitialLaw(Uniform{a, b});
}

InitialLaw InitialLaw::gaussian(double m, double s)
{
    require_finite(m, "initial gaussian m");
    require_finite(s, "initial gaussian s");
    if (s < 0)
    {
        throw ValidationError("initial gaussian s must be nonnegative");
    }
    return InitialLaw(Gaussian{m, s});
}

double InitialLaw::mean() const noexcept
{
    return std::visit(Overload{
                          [](PointMass const& p) { return p.x0; },
                          [](Uniform const& u) { return 0.5 * (u.a + u.b); },
                          [](Gaussian const& g) { return g.m; },
                      },
                      kind_);
}

double InitialLaw::second_moment() const noexcept
{
    return std::visit(Overload{
                          [](PointMass const& p) { return p.x0 * p.x0; },
                          [](Uniform const& u) { return (u.a * u.a + u.a * u.b + u.b * u.b) / 3.0; },
                          [](Gaussian const& g) { return g.m * g.m + g.s * g.s; },
                      },
                      kind_);
}

double InitialLaw::sample(NoiseStream& stream) const noexcept
{
    return std::visit(Overload{
                          [](PointMass const& p) { return p.x0; },
                          [&](Uniform const& u) { return u.a + (u.b - u.a) * stream.uniform(); },
                          [&](Gaussian const& g) { return g.m + g.s * stream.normal(); },
                      },
                      kind_);
}

std::string InitialLaw::kind_name() const
{
    static char const* const names[] = {"point", "uniform", "gaussian"};
    return names[kind_.index()];
}

double sample_initial(InitialLaw const& law, NoiseStream& stream) noexcept
{
    return law.sample(stream);
}

//---------------------------------------------------------------------------//
// DistanceFunction
//---------------------------------------------------------------------------//
DistanceFunction DistanceFunction::table(std::vector<double> breakpoints, std::vector<double> values)
{
    check_table(breakpoints, values, "distance table");
    if (!strictly_increasing_values(values))
    {
        throw ValidationError("distance table: values must be strictly increasing");
    }
    return DistanceFunction(Table{std::move(breakpoints), std::move(values)});
}

std::string DistanceFunction::kind_name() const
{
    return is_same_as_rate() ? "same_as_rate" : "table";
}

double eval_distance(DistanceFunction const& a, RateFunction const& rate, double x)
{
    if (auto const* t = std::get_if<DistanceFunction::Table>(&a.kind()))
    {
        return interpolate(t->breakpoints, t->values, x);
    }
    if (!rate.strictly_increasing())
    {
        throw ValidationError("distance same_as_rate requires a strictly increasing rate, got "
                              + rate.kind_name());
    }
    return eval_rate(rate, x);
}

double distance_sup_bound(DistanceFunction const& a, RateFunction const& rate)
{
    if (auto const* t = std::get_if<DistanceFunction::Table>(&a.kind()))
    {
        double m = 0;
        for (double v : t->values)
        {
            m = std::max(m, std::abs(v));
        }
        return m;
    }
    if (!rate.strictly_increasing())
    {
        throw ValidationError("distance same_as_rate requires a strictly increasing rate, got "
                              + rate.kind_name());
    }
    return std::max(std::abs(rate.sup_bound()), std::abs(rate.inf_bound()));
}

//---------------------------------------------------------------------------//
// Validation
//---------------------------------------------------------------------------//
std::vector<std::string> AssumptionReport::failures() const
{
    std::vector<std::string> out;
    for (auto const* c : {&lipschitz, &centered, &contraction})
    {
        if (!c->passed)
        {
            out.push_back(c->name + ": " + c->evidence);
        }
    }
    return out;
}

std::string AssumptionReport::summary() const
{
    std::ostringstream os;
    for (auto const* c : {&lipschitz, &centered, &contraction})
    {
        os << c->name << ": " << (c->passed ? "pass" : "FAIL") << " [" << c->method << "] "
           << c->evidence << '\n';
    }
    return os.str();
}

namespace {

AssumptionCheck check_lipschitz(RateFunction const& rate, ProbeOptions const& probe)
{
    AssumptionCheck out{"Assumption 1", false, "analytic", ""};
    bool const nonneg = rate.inf_bound() >= 0;
    std::ostringstream os;
    if (auto const* t = std::get_if<RateFunction::Table>(&rate.kind()))
    {
        out.method = "probe";
        // Finite-difference slopes on the probe grid, plus the exact knot slopes
        double probed = 0;
        double const h = (probe.upper - probe.lower) / (probe.points - 1);
        double prev = eval_rate(rate, probe.lower);
        for (int i = 1; i < probe.points; ++i)
        {
            double const cur = eval_rate(rate, probe.lower + i * h);
            probed = std::max(probed, std::abs(cur - prev) / h);
            prev = cur;
        }
        double const exact = max_slope(t->breakpoints, t->values);
        bool const within = std::max(probed, exact) <= t->lipschitz * (1 + 1e-12) + 1e-15;
        os << "declared L=" << format_double(t->lipschitz) << ", probe slope="
           << format_double(probed) << ", knot slope=" << format_double(exact);
        out.passed = within && nonneg;
        if (!within)
        {
            os << "; slope exceeds declared Lipschitz constant";
        }
    }
    else
    {
        os << "L=" << format_double(rate.lipschitz());
        out.passed = nonneg;
    }
    if (!nonneg)
    {
        os << "; rate takes negative values (inf f=" << format_double(rate.inf_bound()) << ")";
    }
    out.evidence = os.str();
    return out;
}

AssumptionCheck check_centered(MarkLaw const& marks, InitialLaw const& initial)
{
    AssumptionCheck out{"Assumption 2", false, "analytic", ""};
    double scale = 1.0;
    for (double p : marks.quadrature().points)
    {
        scale = std::max(scale, std::abs(p));
    }
    double const m = marks.mean();
    bool const centered = std::abs(m) <= 1e-12 * scale;
    bool const finite = std::isfinite(marks.variance()) && std::isfinite(initial.second_moment());
    std::ostringstream os;
    os << "mark mean=" << format_double(m) << ", sigma^2=" << format_double(marks.variance())
       << ", E[X0^2]=" << format_double(initial.second_moment());
    if (!centered)
    {
        os << "; mark law is not centered";
    }
    out.passed = centered && finite;
    out.evidence = os.str();
    return out;
}

AssumptionCheck check_contraction(ModelSpec const& spec, ProbeOptions const& probe)
{
    AssumptionCheck out{"Assumption 3", true, "analytic", ""};
    auto const& rate = spec.rate;
    std::ostringstream os;
    os << "inf f=" << format_double(rate.inf_bound());
    bool const inf_ok = rate.inf_bound() > 0
                        || (spec.allow_zero_inf_rate && rate.inf_bound() == 0);
    if (!inf_ok)
    {
        out.passed = false;
        os << (rate.inf_bound() == 0 ? "; inf f = 0 requires the override flag"
                                     : "; inf f must be positive");
    }

    bool const table_rate = std::holds_alternative<RateFunction::Table>(rate.kind());
    if (spec.distance.is_same_as_rate())
    {
        if (auto const* a = std::get_if<RateFunction::Arctan>(&rate.kind()))
        {
            bool const ok = a->d > 0
                            && (a->c > a->d * kPi / 2
                                || (spec.allow_zero_inf_rate && a->c == a->d * kPi / 2));
            os << "; arctan requires c > d*pi/2 and d > 0 (c=" << format_double(a->c)
               << ", d*pi/2=" << format_double(a->d * kPi / 2) << ")";
            out.passed = out.passed && ok;
        }
        else if (!rate.strictly_increasing())
        {
            out.passed = false;
            os << "; distance same_as_rate needs a strictly increasing rate";
        }
        else
        {
            out.method = "probe";
            os << "; table rate used as distance (strictly increasing knots)";
        }
    }
    else
    {
        // f - C a comparison on the probe grid: |df| <= C |da| with finite C
        out.method = table_rate ? "probe" : out.method;
        auto const& t = std::get<DistanceFunction::Table>(spec.distance.kind());
        double const h = (probe.upper - probe.lower) / (probe.points - 1);
        double ratio = 0;
        bool bounded = true;
        double fprev = eval_rate(rate, probe.lower);
        double aprev = interpolate(t.breakpoints, t.values, probe.lower);
        for (int i = 1; i < probe.points; ++i)
        {
            double const x = probe.lower + i * h;
            double const fcur = eval_rate(rate, x);
            double const acur = interpolate(t.breakpoints, t.values, x);
            double const df = std::abs(fcur - fprev);
            double const da = std::abs(acur - aprev);
            if (da > 0)
            {
                ratio = std::max(ratio, df / da);
            }
            else if (df > 0)
            {
                bounded = false;
            }
            fprev = fcur;
            aprev = acur;
        }
        if (!std::holds_alternative<RateFunction::Constant>(rate.kind()))
        {
            out.method = "probe";
        }
        os << "; probe |df|/|da| max=" << format_double(ratio);
        if (!bounded)
        {
            out.passed = false;
            os << "; rate varies where the distance is flat";
        }
    }
    out.evidence = os.str();
    return out;
}

}  // namespace

AssumptionReport validate_model(ModelSpec const& spec, ProbeOptions const& probe)
{
    if (!std::isfinite(spec.alpha) || !(spec.alpha > 0))
    {
        throw ValidationError("alpha must be positive and finite");
    }
    if (!(probe.upper > probe.lower) || probe.points < 2)
    {
        throw ValidationError("probe interval must be nondegenerate with at least 2 points");
    }
    AssumptionReport report;
    report.lipschitz = check_lipschitz(spec.rate, probe);
    report.centered = check_centered(spec.mark_law, spec.initial_law);
    report.contraction = check_contraction(spec, probe);
    return report;
}

namespace {

void raise_if_failed(AssumptionReport const& report, bool limit)
{
    std::vector<std::string> names;
    std::vector<AssumptionCheck const*> checks{&report.lipschitz, &report.centered};
    if (limit)
    {
        checks.push_back(&report.contraction);
    }
    std::string message;
    for (auto const* c : checks)
    {
        if (!c->passed)
        {
            names.push_back(c->name);
            message += (message.empty() ? "" : "; ") + c->name + " failed (" + c->evidence + ")";
        }
    }
    if (!names.empty())
    {
        throw AssumptionError(message, std::move(names));
    }
}

}  // namespace

void require_finite_system(ModelSpec const& spec)
{
    raise_if_failed(validate_model(spec), false);
}

void require_limit_system(ModelSpec const& spec)
{
    raise_if_failed(validate_model(spec), true);
}

}  // namespace chaosmf
