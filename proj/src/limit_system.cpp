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

#include "chaosmf/limit_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chaosmf {
namespace {

// sqrt((1 - exp(-2 a h)) / (2 a h)): rescales a Brownian increment over h
// to the exact variance of the Ornstein-Uhlenbeck transition
double ou_scale(double alpha, double h) noexcept
{
    double const x = 2.0 * alpha * h;
    return x > 0 ? std::sqrt(-std::expm1(-x) / x) : 1.0;
}

}  // namespace

//---------------------------------------------------------------------------//
void GridSpec::validate() const
{
    if (!(horizon > 0) || !std::isfinite(horizon))
    {
        throw std::invalid_argument("grid horizon must be positive");
    }
    if (!(dt > 0) || dt > horizon)
    {
        throw std::invalid_argument("grid dt must be in (0, horizon]");
    }
}

std::vector<double> GridSpec::times() const
{
    validate();
    auto const steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));
    std::vector<double> out(steps + 1);
    for (std::size_t k = 0; k < steps; ++k)
    {
        out[k] = static_cast<double>(k) * dt;
    }
    out[steps] = horizon;
    return out;
}

double StepFunction::operator()(double t) const
{
    if (times.empty())
    {
        throw std::logic_error("empty step function");
    }
    if (t <= times.front())
    {
        return values.front();
    }
    auto it = std::lower_bound(times.begin(), times.end(), t);
    auto const k = static_cast<std::size_t>(it - times.begin());
    return values[std::min(k, values.size()) - 1];
}

//---------------------------------------------------------------------------//
BrownianPath shared_brownian(SeedSpec const& seed, std::uint32_t replication, GridSpec const& grid)
{
    auto oracle = std::make_shared<BrownianOracle const>(seed, replication, grid.horizon);
    return make_brownian_path(std::move(oracle), grid.times());
}

EnsembleResult run_ensemble(EnsembleSetup const& setup, StepObserver const& observer)
{
    auto const& spec = *setup.spec;
    auto const times = setup.grid.times();
    std::size_t const steps = times.size() - 1;
    std::uint32_t const m = setup.particles;
    if (m < 1)
    {
        throw std::invalid_argument("ensemble needs at least one particle");
    }
    if (!setup.mu_override.empty() && setup.mu_override.size() != times.size())
    {
        throw std::invalid_argument("mu override must have one value per grid time");
    }
    if (setup.brownian == nullptr)
    {
        throw std::invalid_argument("ensemble needs a Brownian path");
    }
    auto const& w = *setup.brownian;
    std::vector<double> w_grid(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
    {
        w_grid[k] = w.value_at(times[k]);
    }

    double const alpha = spec.alpha;
    double const sigma = std::sqrt(spec.sigma2());
    double const bound = spec.rate_bound();
    bool const adapted = setup.grid.jump_adapted;
    constexpr double never = std::numeric_limits<double>::infinity();

    std::vector<double> x(m);
    std::vector<NoiseStream> clocks;
    std::vector<double> next(m, never);
    clocks.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i)
    {
        std::uint32_t const idx = setup.first_index + i;
        auto init = derive_stream(setup.seed, StreamRole::initial(idx, setup.replication));
        x[i] = sample_initial(spec.initial_law, init);
        clocks.push_back(derive_stream(setup.seed, StreamRole::proposal(idx, setup.replication)));
        if (bound > 0)
        {
            next[i] = clocks[i].exponential(bound);
        }
    }

    EnsembleResult result;
    result.mu_f.resize(times.size());
    if (setup.record_jumps)
    {
        result.jumps.resize(m);
    }

    for (std::size_t k = 0;; ++k)
    {
        double v;
        if (setup.mu_override.empty())
        {
            double sum = 0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (double xi : x)
            {
                double const fi = eval_rate(spec.rate, xi);
                sum += fi;
                lo = std::min(lo, fi);
                hi = std::max(hi, fi);
            }
            v = std::clamp(sum / m, lo, hi);
        }
        else
        {
            v = setup.mu_override[k];
        }
        result.mu_f[k] = v;
        if (observer)
        {
            observer(k, times[k], x, v);
        }
        if (k == steps)
        {
            break;
        }

        double const t0 = times[k];
        double const t1 = times[k + 1];
        double const h = t1 - t0;
        double const decay = std::exp(-alpha * h);
        double const diffusion = sigma * std::sqrt(std::max(v, 0.0));
        double const noise = diffusion * ou_scale(alpha, h) * (w_grid[k + 1] - w_grid[k]);
        auto propagate = [&](double from, double dt, double dw) {
            return from * std::exp(-alpha * dt) + diffusion * ou_scale(alpha, dt) * dw;
        };

        for (std::uint32_t i = 0; i < m; ++i)
        {
            if (next[i] > t1)
            {
                x[i] = x[i] * decay + noise;
                continue;
            }
            auto& clock = clocks[i];
            if (adapted)
            {
                // Anchor moves to the latest reset; f is evaluated at the
                // propagated left limit at each proposal time
                bool reset = false;
                double anchor_t = t0;
                double anchor_w = w_grid[k];
                double anchor_x = x[i];
                while (next[i] <= t1)
                {
                    double const tau = next[i];
                    double const z = bound * clock.uniform();
                    next[i] += clock.exponential(bound);
                    double const w_tau = diffusion > 0 ? w.value_at(tau) : 0.0;
                    double const pre = propagate(anchor_x, tau - anchor_t, w_tau - anchor_w);
                    if (z <= eval_rate(spec.rate, pre))
                    {
                        reset = true;
                        anchor_t = tau;
                        anchor_w = w_tau;
                        anchor_x = 0.0;
                        if (setup.record_jumps)
                        {
                            result.jumps[i].push_back(tau);
                        }
                    }
                }
                x[i] = reset ? propagate(0.0, t1 - anchor_t,
                                         diffusion > 0 ? w_grid[k + 1] - anchor_w : 0.0)
                             : x[i] * decay + noise;
            }
            else
            {
                double const end = x[i] * decay + noise;
                double const f_end = eval_rate(spec.rate, end);
                bool jumped = false;
                while (next[i] <= t1)
                {
                    double const z = bound * clock.uniform();
                    next[i] += clock.exponential(bound);
                    jumped = jumped || z <= f_end;
                }
                x[i] = jumped ? 0.0 : end;
                if (jumped && setup.record_jumps)
                {
                    result.jumps[i].push_back(t1);
                }
            }
        }
    }
    return result;
}

//---------------------------------------------------------------------------//
MeanFieldTrajectory simulate_mean_field(ModelSpec const& spec, std::uint32_t particles,
                                        GridSpec const& grid, SeedSpec const& seed,
                                        MeanFieldOptions const& options)
{
    require_limit_system(spec);
    MeanFieldTrajectory traj;
    traj.particles = particles;
    traj.brownian = shared_brownian(seed, options.replication, grid);

    EnsembleSetup setup;
    setup.spec = &spec;
    setup.particles = particles;
    setup.grid = grid;
    setup.seed = seed;
    setup.replication = options.replication;
    setup.brownian = &traj.brownian;
    setup.record_jumps = options.store_jumps;

    StepObserver observer;
    if (options.store_states)
    {
        traj.states.reserve(traj.brownian.size());
        observer = [&traj](std::size_t, double, std::span<double const> x, double) {
            traj.states.emplace_back(x.begin(), x.end());
        };
    }
    auto result = run_ensemble(setup, observer);
    traj.mu_f = std::move(result.mu_f);
    traj.jumps = std::move(result.jumps);
    return traj;
}

StepFunction mu_f_path(MeanFieldTrajectory const& traj)
{
    auto const t = traj.times();
    return StepFunction{{t.begin(), t.end()}, traj.mu_f};
}

std::vector<double> sample_limit_marginal(ModelSpec const& spec, std::uint32_t particles,
                                          GridSpec const& grid, double t, SeedSpec const& seed,
                                          std::uint32_t replication)
{
    if (!(t >= 0) || t > grid.horizon)
    {
        throw std::out_of_range("sample_limit_marginal: t outside [0, horizon]");
    }
    require_limit_system(spec);
    if (t == 0)
    {
        std::vector<double> out(particles);
        for (std::uint32_t i = 0; i < particles; ++i)
        {
            auto init = derive_stream(seed, StreamRole::initial(i, replication));
            out[i] = sample_initial(spec.initial_law, init);
        }
        return out;
    }
    GridSpec sub = grid;
    sub.horizon = t;
    sub.dt = std::min(grid.dt, t);
    BrownianPath w = shared_brownian(seed, replication, sub);

    EnsembleSetup setup;
    setup.spec = &spec;
    setup.particles = particles;
    setup.grid = sub;
    setup.seed = seed;
    setup.replication = replication;
    setup.brownian = &w;
    std::vector<double> out;
    std::size_t const last = w.size() - 1;
    run_ensemble(setup, [&](std::size_t k, double, std::span<double const> x, double) {
        if (k == last)
        {
            out.assign(x.begin(), x.end());
        }
    });
    return out;
}

//---------------------------------------------------------------------------//
PicardResult picard_solve(ModelSpec const& spec, BrownianPath const& brownian, GridSpec const& grid,
                          SeedSpec const& seed, PicardOptions const& options)
{
    require_limit_system(spec);
    if (options.replications < 1)
    {
        throw std::invalid_argument("picard_solve: need at least one replication");
    }
    if (options.max_iter < 1 || !(options.tol > 0))
    {
        throw std::invalid_argument("picard_solve: max_iter >= 1 and tol > 0 required");
    }
    auto const times = grid.times();
    std::size_t const nt = times.size();
    std::uint32_t const r = options.replications;

    // Iterate 0: X_0 held constant in time
    std::vector<double> prev_a(nt * r);
    PicardIterate it0;
    {
        double sum = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        it0.terminal.resize(r);
        for (std::uint32_t j = 0; j < r; ++j)
        {
            auto init = derive_stream(seed, StreamRole::initial(j, options.stream_replication));
            double const x0 = sample_initial(spec.initial_law, init);
            double const fx = eval_rate(spec.rate, x0);
            double const ax = eval_distance(spec.distance, spec.rate, x0);
            sum += fx;
            lo = std::min(lo, fx);
            hi = std::max(hi, fx);
            it0.terminal[j] = x0;
            for (std::size_t k = 0; k < nt; ++k)
            {
                prev_a[k * r + j] = ax;
            }
        }
        it0.mu_f.assign(nt, std::clamp(sum / r, lo, hi));
    }

    PicardResult result;
    result.iterates.push_back(std::move(it0));

    EnsembleSetup setup;
    setup.spec = &spec;
    setup.particles = r;
    setup.grid = grid;
    setup.seed = seed;
    setup.replication = options.stream_replication;
    setup.brownian = &brownian;

    std::vector<double> cur_a(nt * r);
    std::vector<double> sup_diff(r);
    for (int n = 1; n <= options.max_iter; ++n)
    {
        PicardIterate next;
        next.mu_f.resize(nt);
        std::fill(sup_diff.begin(), sup_diff.end(), 0.0);
        std::vector<double> const& frozen = result.iterates.back().mu_f;
        setup.mu_override = frozen;
        run_ensemble(setup, [&](std::size_t k, double, std::span<double const> x, double) {
            double sum = 0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::uint32_t j = 0; j < r; ++j)
            {
                double const fx = eval_rate(spec.rate, x[j]);
                sum += fx;
                lo = std::min(lo, fx);
                hi = std::max(hi, fx);
                double const ax = eval_distance(spec.distance, spec.rate, x[j]);
                cur_a[k * r + j] = ax;
                sup_diff[j] = std::max(sup_diff[j], std::abs(ax - prev_a[k * r + j]));
            }
            next.mu_f[k] = std::clamp(sum / r, lo, hi);
            if (k == nt - 1)
            {
                next.terminal.assign(x.begin(), x.end());
            }
        });
        double delta = 0;
        for (double d : sup_diff)
        {
            delta += d;
        }
        delta /= r;
        result.delta.push_back(delta);
        result.iterates.push_back(std::move(next));
        result.iterations = n;
        std::swap(prev_a, cur_a);
        if (delta < options.tol)
        {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace chaosmf
