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
#include <optional>
#include <vector>

#include "chaosmf/model.hpp"
#include "chaosmf/random.hpp"

namespace chaosmf {

//! One thinning proposal. Neuron indices are zero-based.
struct EventRecord
{
    double time = 0;
    std::uint32_t neuron = 0;
    //! Present exactly for accepted events
    std::optional<double> mark;
    //! Spiker's left-limit state X^I_{t-}
    double pre_state = 0;
    bool accepted = false;
};

struct FiniteOptions
{
    std::uint32_t replication = 0;
    //! Keep rejected proposals in the log (debugging only)
    bool log_rejected = false;
};

//---------------------------------------------------------------------------//
/*!
 * Exact event log of the N-particle system on [0, T].
 *
 * Only initial states and per-event (time, neuron, mark, pre-state) are kept;
 * any state is reconstructed by replaying the log with \c FiniteCursor.
 */
class FiniteTrajectory
{
public:
    FiniteTrajectory(std::uint32_t n, double alpha, double horizon, double rate_bound,
                     std::vector<double> initial, std::vector<EventRecord> events);

    std::uint32_t size() const noexcept { return n_; }
    double alpha() const noexcept { return alpha_; }
    double horizon() const noexcept { return horizon_; }
    double rate_bound() const noexcept { return rate_bound_; }
    double jump_scale() const noexcept { return inv_sqrt_n_; }
    std::vector<double> const& initial_states() const noexcept { return initial_; }
    std::vector<EventRecord> const& events() const noexcept { return events_; }
    std::size_t accepted_count() const noexcept { return accepted_; }

private:
    std::uint32_t n_;
    double alpha_;
    double horizon_;
    double rate_bound_;
    double inv_sqrt_n_;
    std::vector<double> initial_;
    std::vector<EventRecord> events_;
    std::size_t accepted_ = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Exponential-decay frame: X_i(t) = (A_i + G) exp(-alpha (t - t_ref)).
 *
 * A common jump only moves G; the spiker is pinned with A_I = -G so its
 * post-state is exactly zero. The frame is rebased at events once the
 * growth factor exceeds e. Tracks either all neurons or a single one; both
 * modes perform identical arithmetic on the tracked coordinates.
 */
class DecayFrame
{
public:
    DecayFrame(double alpha, std::uint32_t n, std::vector<double> const& initial,
               std::optional<std::uint32_t> only = std::nullopt);

    //! Value of neuron \p i at time \p t (no event in between)
    double value(std::uint32_t i, double t) const noexcept;
    //! Apply an accepted event of neuron \p spiker with mark \p u at time \p t
    void jump(double t, std::uint32_t spiker, double u) noexcept;
    bool tracks(std::uint32_t i) const noexcept { return !only_ || *only_ == i; }
    //! All tracked values at time t (full mode only)
    void values(double t, std::vector<double>& out) const;

private:
    std::size_t slot(std::uint32_t i) const noexcept { return only_ ? 0 : i; }

    double alpha_;
    double inv_sqrt_n_;
    std::optional<std::uint32_t> only_;
    std::vector<double> a_;
    double g_ = 0;
    double t_ref_ = 0;
};

/*!
 * Exact simulation by aggregated thinning: a global clock at rate
 * N * sup f, uniform neuron attribution, acceptance iff z <= f(X^I_{t-}).
 * Throws AssumptionError unless the finite-system assumptions hold.
 */
FiniteTrajectory simulate_finite(ModelSpec const& spec, std::uint32_t n, double horizon,
                                 SeedSpec const& seed, FiniteOptions const& options = {});

//---------------------------------------------------------------------------//
/*!
 * Forward replay of a trajectory. Times passed to \c advance must be
 * nondecreasing; each event is applied once.
 */
class FiniteCursor
{
public:
    explicit FiniteCursor(FiniteTrajectory const& traj,
                          std::optional<std::uint32_t> only = std::nullopt);

    //! Apply events with time <= t (or < t when \p left_limit)
    void advance(double t, bool left_limit = false);
    double value(std::uint32_t i, double t) const noexcept { return frame_.value(i, t); }
    void values(double t, std::vector<double>& out) const { frame_.values(t, out); }
    //! Index of the next unapplied event
    std::size_t position() const noexcept { return next_; }
    //! Called after each applied accepted event with the event record
    void set_event_hook(std::function<void(EventRecord const&)> hook) { hook_ = std::move(hook); }

private:
    FiniteTrajectory const* traj_;
    DecayFrame frame_;
    std::size_t next_ = 0;
    double last_t_ = 0;
    std::function<void(EventRecord const&)> hook_;
};

//! All N states at t; throws std::out_of_range if t is outside [0, T]
std::vector<double> state_at(FiniteTrajectory const& traj, double t, bool left_limit = false);

//! (1/N) sum_i g(X^i_t)
double empirical_statistic(FiniteTrajectory const& traj, double t,
                           std::function<double(double)> const& g);

//! (1/sqrt N) * sum of marks of accepted events in [0, t]
double small_jump_martingale(FiniteTrajectory const& traj, double t);

//! Accepted events per neuron in [0, t]
std::vector<std::uint64_t> spike_counts(FiniteTrajectory const& traj, double t);

//! Per-neuron sorted accepted-event times
std::vector<std::vector<double>> spike_trains(FiniteTrajectory const& traj);

}  // namespace chaosmf
