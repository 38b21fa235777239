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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chaosmf/finite_system.hpp"
#include "chaosmf/limit_system.hpp"
#include "chaosmf/model.hpp"
#include "chaosmf/smooth.hpp"
#include "chaosmf/stats.hpp"

namespace chaosmf {

//! Estimate with its Monte Carlo error over independent replications
struct ResidualReport
{
    double estimate = 0;
    double se = 0;
    std::size_t replications = 0;
    //! Root mean square of the per-replication values
    double rms = 0;
    std::string configuration;
};

//---------------------------------------------------------------------------//
// Coupling between mean-field ensembles of different sizes
//---------------------------------------------------------------------------//
/*!
 * E|a(X^M_i(t)) - a(X^ref_i(t))| for each M, with particle i < M sharing its
 * initial, proposal and Brownian streams with the reference ensemble.
 * Requires reference >= 4 max(sizes).
 */
RateFit coupling_distance(ModelSpec const& spec, std::vector<std::uint32_t> const& sizes,
                          std::uint32_t reference, GridSpec const& grid, double t,
                          SeedSpec const& seed, std::uint32_t replications, unsigned threads = 1);

//---------------------------------------------------------------------------//
// Pair martingale functional of the finite system
//---------------------------------------------------------------------------//
struct MartingaleTimes
{
    //! History times s_1 < ... < s_k < s (may be empty)
    std::vector<double> history;
    double s = 0;
    double t = 1;

    void validate() const;
};

struct MartingaleOptions
{
    //! Trapezoid step for the time integrals over [s, t]
    double quad_step = 1e-3;
};

//! Integrands of the functional at one time, already divided by N^2
struct MartingaleIntegrands
{
    //! Compensator drift: expected rate of change of the pair sum
    double drift = 0;
    //! Generator term of the functional itself
    double raw = 0;
    //! (1/N^2) sum_ij c_i c_j phi(x_i, x_j)
    double pair_mean = 0;
};

/*!
 * Integrands from separable sums, O(N) per call. \p weights holds the
 * per-particle history factors c_i = prod_k chi(X^i_{s_k}).
 */
MartingaleIntegrands martingale_integrands(ModelSpec const& spec, TestFunctionSet const& fns,
                                           std::span<double const> states,
                                           std::span<double const> weights);

//! Same quantities by explicit O(N^2) pair loops (reference route)
MartingaleIntegrands martingale_integrands_pairs(ModelSpec const& spec, TestFunctionSet const& fns,
                                                 std::span<double const> states,
                                                 std::span<double const> weights);

struct MartingaleReport
{
    //! Compensated estimator: martingale parts removed, same expectation
    ResidualReport compensated;
    //! The functional evaluated literally
    ResidualReport raw;
};

MartingaleReport martingale_residual(ModelSpec const& spec, std::uint32_t n,
                                     MartingaleTimes const& times, TestFunctionSet const& fns,
                                     std::uint32_t replications, SeedSpec const& seed,
                                     MartingaleOptions const& options = {}, unsigned threads = 1);

//! Fit of |estimate| against N
RateFit fit_residuals(std::vector<std::uint32_t> const& sizes,
                      std::vector<ResidualReport> const& reports);

//---------------------------------------------------------------------------//
// Weak-form residual of the conditional limit equation
//---------------------------------------------------------------------------//
/*!
 * R(t) = mu_t(phi) - mu_0(phi) - sum_k mu_k(phi') sigma sqrt(mu_k(f)) dW_k
 *        - sum_k mu_k([phi(0) - phi] f - alpha x phi' + sigma^2/2 phi'' mu_k(f)) dt_k
 * evaluated on one mean-field ensemble per replication.
 */
ResidualReport spde_residual(ModelSpec const& spec, std::uint32_t particles, GridSpec const& grid,
                             Smooth1D const& phi, double t, SeedSpec const& seed,
                             std::uint32_t replications, unsigned threads = 1);

//! Residual of one ensemble (replication \p replication of \p seed)
double spde_residual_single(ModelSpec const& spec, std::uint32_t particles, GridSpec const& grid,
                            Smooth1D const& phi, double t, SeedSpec const& seed,
                            std::uint32_t replication);

//---------------------------------------------------------------------------//
// Conditional independence given the common noise
//---------------------------------------------------------------------------//
struct IndependenceOptions
{
    //! Ensemble size supplying mu(f) on the fixed path
    std::uint32_t reference_particles = 4096;
    //! Ensemble size supplying mu(f) on each fresh path (unconditional run)
    std::uint32_t unconditional_particles = 256;
    bool unconditional = true;
};

struct IndependenceReport
{
    Correlation conditional;
    Correlation unconditional;
    std::size_t replications = 0;
    //! 3 / sqrt(R)
    double band = 0;
};

IndependenceReport conditional_independence(ModelSpec const& spec, GridSpec const& grid, double t,
                                            std::uint32_t replications, SeedSpec const& seed,
                                            IndependenceOptions const& options = {},
                                            unsigned threads = 1);

//---------------------------------------------------------------------------//
// Finite-system audits
//---------------------------------------------------------------------------//
struct MomentReport
{
    std::vector<double> times;
    std::vector<double> second_moment;
    std::vector<double> se;
    std::vector<double> bound;
    std::vector<bool> pass;
    //! E[sup_{s <= T} |X^1_s|]
    MeanSE sup_abs;

    bool all_pass() const noexcept;
};

//! Bound E[X_0^2] + sigma^2 sup f t
double second_moment_bound(ModelSpec const& spec, double t);

MomentReport moment_audit(ModelSpec const& spec, std::uint32_t n, std::vector<double> const& t_grid,
                          std::uint32_t replications, SeedSpec const& seed, unsigned threads = 1);

struct ExactnessReport
{
    MeanSE count;
    double expected = 0;
    double ks = 0;
    double ks_critical = 0;
    std::size_t gaps = 0;
};

//! -log of the censoring probability tolerated for a kept inter-spike gap
inline constexpr double censoring_margin = 20.0;

/*!
 * Spike counts and inter-spike times of a constant-rate system. Gaps are
 * pooled from those starting before T - censoring_margin / lambda (only the
 * first gap of each train when that is negative).
 */
ExactnessReport poisson_exactness(ModelSpec const& spec, std::uint32_t n, double horizon,
                                  std::uint32_t replications, SeedSpec const& seed,
                                  unsigned threads = 1);

struct IsometryReport
{
    //! E[(M_t^N)^2]
    MeanSE lhs;
    //! sigma^2 E[int_0^t mu^N_s(f) ds]
    MeanSE rhs;
    //! Paired lhs - rhs
    MeanSE difference;
};

IsometryReport martingale_isometry(ModelSpec const& spec, std::uint32_t n, double t,
                                   std::uint32_t replications, SeedSpec const& seed,
                                   double quad_step = 5e-3, unsigned threads = 1);

struct JumpWindowReport
{
    double t = 0;
    //! Decreasing half-widths
    std::vector<double> eps;
    //! Fraction of replications with an accepted event of neuron 1 in (t - eps, t + eps)
    std::vector<MeanSE> fraction;
    //! Paired fraction(eps_k) / 2 - fraction(eps_{k+1}) for consecutive halvings
    std::vector<MeanSE> halving;
};

JumpWindowReport jump_window(ModelSpec const& spec, std::uint32_t n, double t,
                             std::vector<double> const& eps, std::uint32_t replications,
                             SeedSpec const& seed, unsigned threads = 1);

//---------------------------------------------------------------------------//
// Marginal convergence of the finite system to the limit
//---------------------------------------------------------------------------//
inline constexpr std::uint32_t marginal_batches = 10;

/*!
 * 1-Wasserstein distance between the time-t marginal of a particle in the
 * finite system and in the limit, both averaged over the common noise.
 *
 * Each replication contributes min(sizes) particles of the finite system and
 * as many particles of a limit ensemble driven by a fresh path. Replications
 * are pooled into batches; the estimate and its error are the batch mean and
 * standard error. The pooled sample size does not depend on N, so the floor
 * from sampling noise is the same at every size.
 */
RateFit marginal_convergence(ModelSpec const& spec, std::vector<std::uint32_t> const& sizes,
                             std::uint32_t limit_particles, GridSpec const& grid, double t,
                             std::uint32_t replications, SeedSpec const& seed,
                             unsigned threads = 1);

}  // namespace chaosmf
