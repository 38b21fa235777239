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

#include "chaosmf/finite_system.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace chaosmf {
namespace {

void check_time(FiniteTrajectory const& traj, double t)
{
    if (!(t >= 0) || t > traj.horizon())
    {
        throw std::out_of_range("time outside [0, T]");
    }
}

}  // namespace

//---------------------------------------------------------------------------//
FiniteTrajectory::FiniteTrajectory(std::uint32_t n, double alpha, double horizon,
                                   double rate_bound, std::vector<double> initial,
                                   std::vector<EventRecord> events)
    : n_(n)
    , alpha_(alpha)
    , horizon_(horizon)
    , rate_bound_(rate_bound)
    , inv_sqrt_n_(1.0 / std::sqrt(static_cast<double>(n)))
    , initial_(std::move(initial))
    , events_(std::move(events))
{
    for (auto const& e : events_)
    {
        accepted_ += e.accepted ? 1 : 0;
    }
}

//---------------------------------------------------------------------------//
DecayFrame::DecayFrame(double alpha, std::uint32_t n, std::vector<double> const& initial,
                       std::optional<std::uint32_t> only)
    : alpha_(alpha), inv_sqrt_n_(1.0 / std::sqrt(static_cast<double>(n))), only_(only)
{
    if (only_)
    {
        a_.assign(1, initial.at(*only_));
    }
    else
    {
        a_ = initial;
    }
}

double DecayFrame::value(std::uint32_t i, double t) const noexcept
{
    return (a_[slot(i)] + g_) * std::exp(-alpha_ * (t - t_ref_));
}

void DecayFrame::values(double t, std::vector<double>& out) const
{
    if (only_)
    {
        throw std::logic_error("DecayFrame::values requires a full frame");
    }
    double const decay = std::exp(-alpha_ * (t - t_ref_));
    out.resize(a_.size());
    for (std::size_t i = 0; i < a_.size(); ++i)
    {
        out[i] = (a_[i] + g_) * decay;
    }
}

void DecayFrame::jump(double t, std::uint32_t spiker, double u) noexcept
{
    double const elapsed = alpha_ * (t - t_ref_);
    g_ += u * inv_sqrt_n_ * std::exp(elapsed);
    if (tracks(spiker))
    {
        a_[slot(spiker)] = -g_;
    }
    if (elapsed > 1.0)
    {
        double const decay = std::exp(-elapsed);
        for (auto& a : a_)
        {
            a = (a + g_) * decay;
        }
        g_ = 0;
        t_ref_ = t;
    }
}

//---------------------------------------------------------------------------//
FiniteTrajectory simulate_finite(ModelSpec const& spec, std::uint32_t n, double horizon,
                                 SeedSpec const& seed, FiniteOptions const& options)
{
    if (n < 1)
    {
        throw std::invalid_argument("simulate_finite: N must be at least 1");
    }
    if (!(horizon > 0) || !std::isfinite(horizon))
    {
        throw std::invalid_argument("simulate_finite: horizon must be positive");
    }
    require_finite_system(spec);

    std::uint32_t const rep = options.replication;
    std::vector<double> initial(n);
    for (std::uint32_t i = 0; i < n; ++i)
    {
        auto stream = derive_stream(seed, StreamRole::initial(i, rep));
        initial[i] = sample_initial(spec.initial_law, stream);
    }

    double const bound = spec.rate_bound();
    std::vector<EventRecord> events;
    if (bound > 0)
    {
        std::vector<NoiseStream> marks;
        marks.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i)
        {
            marks.push_back(derive_stream(seed, StreamRole::mark(i, rep)));
        }
        events.reserve(static_cast<std::size_t>(n * bound * horizon) + 16);

        DecayFrame frame(spec.alpha, n, initial);
        auto clock = derive_stream(seed, StreamRole::global_proposal(rep));
        double const total_rate = bound * n;
        double t = 0;
        while (true)
        {
            t += clock.exponential(total_rate);
            if (t > horizon)
            {
                break;
            }
            auto const who = static_cast<std::uint32_t>(clock.below(n));
            double const z = bound * clock.uniform();
            double const pre = frame.value(who, t);
            if (z <= eval_rate(spec.rate, pre))
            {
                double const u = sample_mark(spec.mark_law, marks[who]);
                events.push_back({t, who, u, pre, true});
                frame.jump(t, who, u);
            }
            else if (options.log_rejected)
            {
                events.push_back({t, who, std::nullopt, pre, false});
            }
        }
    }
    return FiniteTrajectory(n, spec.alpha, horizon, bound, std::move(initial), std::move(events));
}

//---------------------------------------------------------------------------//
FiniteCursor::FiniteCursor(FiniteTrajectory const& traj, std::optional<std::uint32_t> only)
    : traj_(&traj), frame_(traj.alpha(), traj.size(), traj.initial_states(), only)
{
}

void FiniteCursor::advance(double t, bool left_limit)
{
    if (t < last_t_)
    {
        throw std::invalid_argument("FiniteCursor: times must be nondecreasing");
    }
    last_t_ = t;
    auto const& events = traj_->events();
    while (next_ < events.size()
           && (left_limit ? events[next_].time < t : events[next_].time <= t))
    {
        auto const& e = events[next_++];
        if (e.accepted)
        {
            frame_.jump(e.time, e.neuron, *e.mark);
            if (hook_)
            {
                hook_(e);
            }
        }
    }
}

//---------------------------------------------------------------------------//
std::vector<double> state_at(FiniteTrajectory const& traj, double t, bool left_limit)
{
    check_time(traj, t);
    FiniteCursor cursor(traj);
    cursor.advance(t, left_limit);
    std::vector<double> out;
    cursor.values(t, out);
    return out;
}

double empirical_statistic(FiniteTrajectory const& traj, double t,
                           std::function<double(double)> const& g)
{
    auto const states = state_at(traj, t);
    double sum = 0;
    for (double x : states)
    {
        sum += g(x);
    }
    return sum / static_cast<double>(states.size());
}

double small_jump_martingale(FiniteTrajectory const& traj, double t)
{
    check_time(traj, t);
    double sum = 0;
    for (auto const& e : traj.events())
    {
        if (e.time > t)
        {
            break;
        }
        if (e.accepted)
        {
            sum += *e.mark;
        }
    }
    return sum * traj.jump_scale();
}

std::vector<std::uint64_t> spike_counts(FiniteTrajectory const& traj, double t)
{
    check_time(traj, t);
    std::vector<std::uint64_t> counts(traj.size(), 0);
    for (auto const& e : traj.events())
    {
        if (e.time > t)
        {
            break;
        }
        counts[e.neuron] += e.accepted ? 1 : 0;
    }
    return counts;
}

std::vector<std::vector<double>> spike_trains(FiniteTrajectory const& traj)
{
    std::vector<std::vector<double>> trains(traj.size());
    for (auto const& e : traj.events())
    {
        if (e.accepted)
        {
            trains[e.neuron].push_back(e.time);
        }
    }
    return trains;
}

}  // namespace chaosmf
