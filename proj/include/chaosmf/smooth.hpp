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

#include <string>
#include <vector>

namespace chaosmf {

//! Value and first three derivatives
struct Jet
{
    double v = 0;
    double d1 = 0;
    double d2 = 0;
    double d3 = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Scalar test function amp * base(freq * x + shift) with a closed-form jet.
 */
class Smooth1D
{
public:
    enum class Kind
    {
        constant,
        identity,
        sin,
        cos,
        tanh,
    };

    Smooth1D() = default;
    Smooth1D(Kind kind, double amp = 1.0, double freq = 1.0, double shift = 0.0);

    static Smooth1D constant(double value) { return Smooth1D(Kind::constant, value); }
    static Smooth1D identity() { return Smooth1D(Kind::identity); }
    static Smooth1D sin() { return Smooth1D(Kind::sin); }
    static Smooth1D cos() { return Smooth1D(Kind::cos); }
    static Smooth1D tanh() { return Smooth1D(Kind::tanh); }
    //! Parse "sin", "cos", "tanh", "identity" or a number (constant)
    static Smooth1D parse(std::string const& text);

    double operator()(double x) const noexcept;
    Jet jet(double x) const noexcept;
    bool is_constant() const noexcept { return kind_ == Kind::constant; }
    std::string name() const;

private:
    Kind kind_ = Kind::constant;
    double amp_ = 0;
    double freq_ = 1;
    double shift_ = 0;
};

//! phi(x, y) = sum_m g_m(x) h_m(y)
struct SeparableTerm
{
    Smooth1D g;
    Smooth1D h;
};

/*!
 * Test functions of the pair martingale functional: the main function phi,
 * one history factor chi_k(x) chi_k(y) and one psi_k per history time.
 */
struct TestFunctionSet
{
    std::vector<SeparableTerm> phi{{Smooth1D::sin(), Smooth1D::cos()}};
    Smooth1D chi = Smooth1D::tanh();
    Smooth1D psi = Smooth1D::identity();

    bool phi_constant() const noexcept;
    std::string describe() const;
};

}  // namespace chaosmf
