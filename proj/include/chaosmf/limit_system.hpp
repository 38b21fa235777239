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
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "chaosmf/brownian.hpp"
#include "chaosmf/model.hpp"
#include "chaosmf/random.hpp"

namespace chaosmf {

//---------------------------------------------------------------------------//
//! Uniform time grid t_k = k dt, with the last point moved onto the horizon
struct GridSpec
{
    double horizon = 1.0;
    double dt = 1e-2;
    //! Apply jumps at their exact proposal times instead of at grid points
    bool jump_adapted = true;

    void validate() const;
    std::vector<double> times() const;
};

//! Left-continuous step function through grid values
struct StepFunction
{
    std::vector<double> times;
    std::vector<double> values;

    //! values[0] at t <= times[0]; values[k] on (times[k], times[k+1]]
    double operator()(double t) const;
};

//---------------------------------------------------------------------------//
/*!
 * One ensemble of particles sharing a Brownian path.
 *
 * Particle i draws its initial state and its thinning clock from the streams
 * initial(first_index + i) and proposal(first_index + i) of \c replication.
 * The diffusion coefficient sigma * sqrt(v_k) is frozen on each step, with
 * v_k either the ensemble average of f (clamped to the range of the sampled
 * values) or supplied externally.
 */
struct EnsembleSetup
{
    ModelSpec const* spec = nullptr;
    std::uint32_t particles = 1;
    GridSpec grid;
    SeedSpec seed;
    std::uint32_t replication = 0;
    std::uint32_t first_index = 0;
    //! Shared W; must answer value_at for grid times (and jump times if adapted)
    BrownianPath const* brownian = nullptr;
    //! Externally supplied v_k at every grid time (empty: use ensemble average)
    std::span<double const> mu_override;
    //! Record accepted jump times per particle
    bool record_jumps = false;
};

//! Called at every grid time with the current states and the frozen v_k
using StepObserver
    = std::function<void(std::size_t k, double t, std::span<double const> states, double mu_f)>;

struct EnsembleResult
{
    std::vector<double> mu_f;
    std::vector<std::vector<double>> jumps;
};

EnsembleResult run_ensemble(EnsembleSetup const& setup, StepObserver const& observer = {});

//! Shared Brownian path of a replication evaluated on a grid
BrownianPath shared_brownian(SeedSpec const& seed, std::uint32_t replication, GridSpec const& grid);

//---------------------------------------------------------------------------//
struct MeanFieldOptions
{
    std::uint32_t replication = 0;
    bool store_states = true;
    bool store_jumps = true;
};

struct MeanFieldTrajectory
{
    std::uint32_t particles = 0;
    BrownianPath brownian;
    //! states[k][i] at grid time k (empty unless stored)
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> jumps;
    std::vector<double> mu_f;

    std::span<double const> times() const noexcept { return brownian.times(); }
};

/*!
 * Mean-field particle scheme with common noise.
 * Throws AssumptionError unless the limit-system assumptions hold.
 */
MeanFieldTrajectory simulate_mean_field(ModelSpec const& spec, std::uint32_t particles,
                                        GridSpec const& grid, SeedSpec const& seed,
                                        MeanFieldOptions const& options = {});

StepFunction mu_f_path(MeanFieldTrajectory const& traj);

//! The M particle states at time t (0 <= t <= grid horizon)
std::vector<double> sample_limit_marginal(ModelSpec const& spec, std::uint32_t particles,
                                          GridSpec const& grid, double t, SeedSpec const& seed,
                                          std::uint32_t replication = 0);

//---------------------------------------------------------------------------//
struct PicardOptions
{
    std::uint32_t replications = 100;
    int max_iter = 20;
    double tol = 1e-3;
    //! Stream replication used for the conditional ensemble
    std::uint32_t stream_replication = 0;
};

struct PicardIterate
{
    //! Ensemble average of f on the grid
    std::vector<double> mu_f;
    //! Replication states at the horizon
    std::vector<double> terminal;
};

struct PicardResult
{
    //! Iterations performed beyond the constant initial iterate
    int iterations = 0;
    //! delta[n-1] = mean over replications of sup_k |a(X^n) - a(X^{n-1})|
    std::vector<double> delta;
    //! Iterates 0..iterations
    std::vector<PicardIterate> iterates;
    bool converged = false;
};

/*!
 * Picard iteration on a fixed Brownian path.
 *
 * Iterate 0 is constant in time. Iterate n+1 reruns every replication with
 * the same streams and the same W, freezing only the coefficient v = mu^n(f)
 * taken from iterate n.
 */
PicardResult picard_solve(ModelSpec const& spec, BrownianPath const& brownian, GridSpec const& grid,
                          SeedSpec const& seed, PicardOptions const& options);

}  // namespace chaosmf
