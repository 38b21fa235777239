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

#include "chaosmf/smooth.hpp"

#include <cmath>
#include <cstdlib>

#include "chaosmf/errors.hpp"

namespace chaosmf {

Smooth1D::Smooth1D(Kind kind, double amp, double freq, double shift)
    : kind_(kind), amp_(amp), freq_(freq), shift_(shift)
{
}

Smooth1D Smooth1D::parse(std::string const& text)
{
    if (text == "sin")
    {
        return sin();
    }
    if (text == "cos")
    {
        return cos();
    }
    if (text == "tanh")
    {
        return tanh();
    }
    if (text == "identity")
    {
        return identity();
    }
    char* end = nullptr;
    double const value = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(value))
    {
        throw ValidationError("unknown test function '" + text + "'");
    }
    return constant(value);
}

double Smooth1D::operator()(double x) const noexcept
{
    double const u = freq_ * x + shift_;
    switch (kind_)
    {
        case Kind::constant:
            return amp_;
        case Kind::identity:
            return amp_ * u;
        case Kind::sin:
            return amp_ * std::sin(u);
        case Kind::cos:
            return amp_ * std::cos(u);
        case Kind::tanh:
            return amp_ * std::tanh(u);
    }
    return 0;
}

Jet Smooth1D::jet(double x) const noexcept
{
    double const u = freq_ * x + shift_;
    double const a1 = amp_ * freq_;
    double const a2 = a1 * freq_;
    double const a3 = a2 * freq_;
    switch (kind_)
    {
        case Kind::constant:
            return {amp_, 0, 0, 0};
        case Kind::identity:
            return {amp_ * u, a1, 0, 0};
        case Kind::sin: {
            double const s = std::sin(u);
            double const c = std::cos(u);
            return {amp_ * s, a1 * c, -a2 * s, -a3 * c};
        }
        case Kind::cos: {
            double const s = std::sin(u);
            double const c = std::cos(u);
            return {amp_ * c, -a1 * s, -a2 * c, a3 * s};
        }
        case Kind::tanh: {
            double const t = std::tanh(u);
            double const s2 = 1 - t * t;
            return {amp_ * t, a1 * s2, -2 * a2 * t * s2, a3 * s2 * (6 * t * t - 2)};
        }
    }
    return {};
}

std::string Smooth1D::name() const
{
    switch (kind_)
    {
        case Kind::constant:
            return "constant(" + std::to_string(amp_) + ")";
        case Kind::identity:
            return "identity";
        case Kind::sin:
            return "sin";
        case Kind::cos:
            return "cos";
        case Kind::tanh:
            return "tanh";
    }
    return "?";
}

bool TestFunctionSet::phi_constant() const noexcept
{
    for (auto const& term : phi)
    {
        if (!term.g.is_constant() || !term.h.is_constant())
        {
            return false;
        }
    }
    return true;
}

std::string TestFunctionSet::describe() const
{
    std::string out = "phi=";
    for (std::size_t m = 0; m < phi.size(); ++m)
    {
        out += (m ? "+" : "") + phi[m].g.name() + "*" + phi[m].h.name();
    }
    return out + ";chi=" + chi.name() + ";psi=" + psi.name();
}

}  // namespace chaosmf
