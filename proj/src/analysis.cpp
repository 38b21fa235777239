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

#include "chaosmf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chaosmf/parallel.hpp"

namespace chaosmf {
namespace {

ResidualReport summarize(std::vector<double> const& values, std::string configuration)
{
    auto const ms = mean_se(values);
    double ss = 0;
    for (double v : values)
    {
        ss += v * v;
    }
    ResidualReport out;
    out.estimate = ms.mean;
    out.se = ms.se;
    out.replications = values.size();
    out.rms = std::sqrt(ss / static_cast<double>(values.size()));
    out.configuration = std::move(configuration);
    return out;
}

GridSpec truncated(GridSpec grid, double t)
{
    if (!(t > 0) || t > grid.horizon)
    {
        throw std::out_of_range("evaluation time outside (0, horizon]");
    }
    grid.horizon = t;
    grid.dt = std::min(grid.dt, t);
    return grid;
}

SeedSpec relabel(SeedSpec seed, char const* suffix)
{
    seed.run_label += suffix;
    return seed;
}

std::vector<double> final_states(ModelSpec const& spec, std::uint32_t particles,
                                 GridSpec const& grid, SeedSpec const& seed,
                                 std::uint32_t replication, BrownianPath const& w,
                                 std::span<double const> mu_override = {},
                                 std::uint32_t first_index = 0)
{
    EnsembleSetup setup;
    setup.spec = &spec;
    setup.particles = particles;
    setup.grid = grid;
    setup.seed = seed;
    setup.replication = replication;
    setup.first_index = first_index;
    setup.brownian = &w;
    setup.mu_override = mu_override;
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

std::uint32_t checked_replications(std::uint32_t r)
{
    if (r < 1 || r > StreamRole::max_replication)
    {
        throw std::invalid_argument("replication count out of range");
    }
    return r;
}

}  // namespace

//---------------------------------------------------------------------------//
RateFit coupling_distance(ModelSpec const& spec, std::vector<std::uint32_t> const& sizes,
                          std::uint32_t reference, GridSpec const& grid, double t,
                          SeedSpec const& seed, std::uint32_t replications, unsigned threads)
{
    require_limit_system(spec);
    checked_replications(replications);
    if (sizes.empty())
    {
        throw std::invalid_argument("coupling_distance: no sizes");
    }
    std::uint32_t const largest = *std::max_element(sizes.begin(), sizes.end());
    if (reference < 4 * largest)
    {
        throw std::invalid_argument("coupling_distance: reference must be >= 4 max(sizes)");
    }
    GridSpec const sub = truncated(grid, t);
    auto per_rep = parallel_map(replications, threads, [&](std::size_t r) {
        auto const rep = static_cast<std::uint32_t>(r);
        BrownianPath const w = shared_brownian(seed, rep, sub);
        auto const ref = final_states(spec, reference, sub, seed, rep, w);
        std::vector<double> a_ref(ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
        {
            a_ref[i] = eval_distance(spec.distance, spec.rate, ref[i]);
        }
        std::vector<double> dist(sizes.size());
        for (std::size_t s = 0; s < sizes.size(); ++s)
        {
            auto const x = final_states(spec, sizes[s], sub, seed, rep, w);
            double sum = 0;
            for (std::size_t i = 0; i < x.size(); ++i)
            {
                sum += std::abs(eval_distance(spec.distance, spec.rate, x[i]) - a_ref[i]);
            }
            dist[s] = sum / static_cast<double>(x.size());
        }
        return dist;
    });
    std::vector<RatePoint> points;
    for (std::size_t s = 0; s < sizes.size(); ++s)
    {
        std::vector<double> column(replications);
        for (std::uint32_t r = 0; r < replications; ++r)
        {
            column[r] = per_rep[r][s];
        }
        auto const ms = mean_se(column);
        points.push_back({static_cast<double>(sizes[s]), ms.mean, ms.se});
    }
    if (points.size() < 3)
    {
        return RateFit{points, std::nullopt};
    }
    return fit_rate(std::move(points));
}

//---------------------------------------------------------------------------//
void MartingaleTimes::validate() const
{
    double prev = -1;
    for (double h : history)
    {
        if (!(h > prev) || h < 0)
        {
            throw std::invalid_argument("history times must be increasing and nonnegative");
        }
        prev = h;
    }
    if (!(s > prev) || s < 0 || !(t > s))
    {
        throw std::invalid_argument("martingale times must satisfy s_1 < ... < s_k < s < t");
    }
}

MartingaleIntegrands martingale_integrands(ModelSpec const& spec, TestFunctionSet const& fns,
                                           std::span<double const> x, std::span<double const> c)
{
    std::size_t const n = x.size();
    double const nn = static_cast<double>(n);
    double const kappa = 1.0 / std::sqrt(nn);
    double const sig2 = spec.sigma2();
    double const ubar = spec.mark_law.mean();
    auto const& rule = spec.mark_law.quadrature();
    std::size_t const nq = rule.points.size();

    std::vector<double> f(n);
    double total_f = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        f[i] = eval_rate(spec.rate, x[i]);
        total_f += f[i];
    }
    double const v = total_f / nn;

    // Weighted sum of a over particles: plain and f-weighted
    struct Sum
    {
        double a = 0;
        double fa = 0;
        void add(double c, double fi, double val)
        {
            a += c * val;
            fa += c * fi * val;
        }
    };
    // sum_ij c_i c_j (S - f_i - f_j) a_i b_j and sum_ij c_i c_j (f_i + f_j) a_i b_j
    auto pair_p = [total_f](Sum const& a, Sum const& b) {
        return total_f * a.a * b.a - a.fa * b.a - a.a * b.fa;
    };
    auto pair_q = [](Sum const& a, Sum const& b) { return a.fa * b.a + a.a * b.fa; };

    MartingaleIntegrands out;
    double all = 0;
    double diag_off = 0;
    double diag_on = 0;
    std::vector<Sum> dg(nq), hs(nq), dh(nq);
    for (auto const& term : fns.phi)
    {
        double const g0 = term.g(0.0);
        double const h0 = term.h(0.0);
        Sum sg, sg1, sg2, sh, sh1, sh2, sdg, sdh;
        Sum sxg1, sxh1;
        double cf = 0;
        double reset_g = 0;
        double reset_h = 0;
        std::fill(dg.begin(), dg.end(), Sum{});
        std::fill(hs.begin(), hs.end(), Sum{});
        std::fill(dh.begin(), dh.end(), Sum{});
        for (std::size_t i = 0; i < n; ++i)
        {
            double const ci = c[i];
            double const fi = f[i];
            Jet const g = term.g.jet(x[i]);
            Jet const h = term.h.jet(x[i]);
            cf += ci * fi;
            reset_g += ci * fi * (g0 - g.v);
            reset_h += ci * fi * (h0 - h.v);
            sg.add(ci, fi, g.v);
            sg1.add(ci, fi, g.d1);
            sg2.add(ci, fi, g.d2);
            sh.add(ci, fi, h.v);
            sh1.add(ci, fi, h.d1);
            sh2.add(ci, fi, h.d2);
            sxg1.add(ci, fi, x[i] * g.d1);
            sxh1.add(ci, fi, x[i] * h.d1);

            double mean_dg = 0;
            double mean_dh = 0;
            double shift_pair = 0;
            for (std::size_t q = 0; q < nq; ++q)
            {
                double const y = x[i] + kappa * rule.points[q];
                double const gq = term.g(y);
                double const hq = term.h(y);
                double const dgq = gq - g.v;
                double const dhq = hq - h.v;
                dg[q].add(ci, fi, dgq);
                hs[q].add(ci, fi, hq);
                dh[q].add(ci, fi, dhq);
                mean_dg += rule.weights[q] * dgq;
                mean_dh += rule.weights[q] * dhq;
                shift_pair += rule.weights[q] * (dgq * hq + g.v * dhq);
            }
            sdg.add(ci, fi, mean_dg);
            sdh.add(ci, fi, mean_dh);

            // i == j contributions: remove the off-diagonal formula, add the diagonal one
            double const lap = g.d2 * h.v + 2 * g.d1 * h.d1 + g.v * h.d2;
            double const grad = g.d1 * h.v + g.v * h.d1;
            double const w = ci * ci;
            double const off = fi * g0 * mean_dh + fi * h0 * mean_dg
                               + (total_f - 2 * fi)
                                     * (shift_pair - 0.5 * kappa * kappa * sig2 * lap
                                        - kappa * ubar * grad)
                               - sig2 / nn * fi * lap;
            double const on = fi * (g.v - g0) * (h.v - h0)
                              + (total_f - fi) * (shift_pair - kappa * ubar * grad)
                              - 0.5 * sig2 * v * lap;
            diag_off += w * off;
            diag_on += w * on;
        }

        double shift = 0;
        for (std::size_t q = 0; q < nq; ++q)
        {
            shift += rule.weights[q] * (pair_p(dg[q], hs[q]) + pair_p(sg, dh[q]));
        }
        double const lap_p = pair_p(sg2, sh) + 2 * pair_p(sg1, sh1) + pair_p(sg, sh2);
        double const grad_p = pair_p(sg1, sh) + pair_p(sg, sh1);
        double const lap_q = pair_q(sg2, sh) + 2 * pair_q(sg1, sh1) + pair_q(sg, sh2);
        all += g0 * cf * sdh.a + h0 * cf * sdg.a
               + (shift - 0.5 * kappa * kappa * sig2 * lap_p - kappa * ubar * grad_p)
               - 0.5 * sig2 / nn * lap_q;

        double const lap_all = sg2.a * sh.a + 2 * sg1.a * sh1.a + sg.a * sh2.a;
        out.raw += spec.alpha * (sxg1.a * sh.a + sg.a * sxh1.a) - 0.5 * sig2 * v * lap_all
                   - reset_g * sh.a - sg.a * reset_h;
        out.pair_mean += sg.a * sh.a;
    }
    double const inv = 1.0 / (nn * nn);
    out.drift = (all - diag_off + diag_on) * inv;
    out.raw *= inv;
    out.pair_mean *= inv;
    return out;
}

MartingaleIntegrands martingale_integrands_pairs(ModelSpec const& spec, TestFunctionSet const& fns,
                                                 std::span<double const> x,
                                                 std::span<double const> c)
{
    std::size_t const n = x.size();
    double const nn = static_cast<double>(n);
    double const kappa = 1.0 / std::sqrt(nn);
    double const sig2 = spec.sigma2();
    double const ubar = spec.mark_law.mean();
    auto const& rule = spec.mark_law.quadrature();

    auto phi = [&](double a, double b) {
        double s = 0;
        for (auto const& term : fns.phi)
        {
            s += term.g(a) * term.h(b);
        }
        return s;
    };
    auto lap = [&](double a, double b) {
        double s = 0;
        for (auto const& term : fns.phi)
        {
            Jet const g = term.g.jet(a);
            Jet const h = term.h.jet(b);
            s += g.d2 * h.v + 2 * g.d1 * h.d1 + g.v * h.d2;
        }
        return s;
    };
    auto grad = [&](double a, double b, double* d1, double* d2) {
        *d1 = 0;
        *d2 = 0;
        for (auto const& term : fns.phi)
        {
            Jet const g = term.g.jet(a);
            Jet const h = term.h.jet(b);
            *d1 += g.d1 * h.v;
            *d2 += g.v * h.d1;
        }
    };
    auto expect = [&](auto&& fn) {
        double s = 0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
        {
            s += rule.weights[q] * fn(kappa * rule.points[q]);
        }
        return s;
    };

    std::vector<double> f(n);
    double total_f = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        f[i] = eval_rate(spec.rate, x[i]);
        total_f += f[i];
    }
    double const v = total_f / nn;

    MartingaleIntegrands out;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            double const xi = x[i];
            double const xj = x[j];
            double const w = c[i] * c[j];
            double const p = phi(xi, xj);
            double const l = lap(xi, xj);
            double d1, d2;
            grad(xi, xj, &d1, &d2);

            out.pair_mean += w * p;
            out.raw += w
                       * (spec.alpha * xi * d1 + spec.alpha * xj * d2 - 0.5 * sig2 * v * l
                          - f[i] * (phi(0, xj) - p) - f[j] * (phi(xi, 0) - p));

            double const shift = expect([&](double d) { return phi(xi + d, xj + d) - p; });
            double drift;
            if (i != j)
            {
                drift = f[i] * expect([&](double d) { return phi(0, xj + d) - phi(0, xj); })
                        + f[j] * expect([&](double d) { return phi(xi + d, 0) - phi(xi, 0); })
                        + (total_f - f[i] - f[j])
                              * (shift - 0.5 * kappa * kappa * sig2 * l
                                 - kappa * ubar * (d1 + d2))
                        - 0.5 * sig2 / nn * (f[i] + f[j]) * l;
            }
            else
            {
                drift = f[i] * (phi(0, 0) - phi(0, xi) - phi(xi, 0) + p)
                        + (total_f - f[i]) * (shift - kappa * ubar * (d1 + d2))
                        - 0.5 * sig2 * v * l;
            }
            out.drift += w * drift;
        }
    }
    double const inv = 1.0 / (nn * nn);
    out.drift *= inv;
    out.raw *= inv;
    out.pair_mean *= inv;
    return out;
}

MartingaleReport martingale_residual(ModelSpec const& spec, std::uint32_t n,
                                     MartingaleTimes const& times, TestFunctionSet const& fns,
                                     std::uint32_t replications, SeedSpec const& seed,
                                     MartingaleOptions const& options, unsigned threads)
{
    times.validate();
    checked_replications(replications);
    if (!(options.quad_step > 0))
    {
        throw std::invalid_argument("quadrature step must be positive");
    }
    require_finite_system(spec);
    auto const cells = static_cast<std::size_t>(
        std::max(1.0, std::ceil((times.t - times.s) / options.quad_step - 1e-9)));
    double const h = (times.t - times.s) / static_cast<double>(cells);

    struct Pair
    {
        double compensated = 0;
        double raw = 0;
    };
    auto values = parallel_map(replications, threads, [&](std::size_t r) {
        FiniteOptions fo;
        fo.replication = static_cast<std::uint32_t>(r);
        auto const traj = simulate_finite(spec, n, times.t, seed, fo);
        FiniteCursor cursor(traj);
        std::vector<double> x;
        std::vector<double> c(n, 1.0);
        double weight = 1.0;
        for (double sk : times.history)
        {
            cursor.advance(sk);
            cursor.values(sk, x);
            double mean_f = 0;
            for (std::uint32_t i = 0; i < n; ++i)
            {
                mean_f += eval_rate(spec.rate, x[i]);
                c[i] *= fns.chi(x[i]);
            }
            weight *= fns.psi(mean_f / n);
        }
        double drift = 0;
        double raw = 0;
        double pair_s = 0;
        double pair_t = 0;
        for (std::size_t q = 0; q <= cells; ++q)
        {
            double const tq = q == cells ? times.t : times.s + static_cast<double>(q) * h;
            cursor.advance(tq);
            cursor.values(tq, x);
            auto const integrand = martingale_integrands(spec, fns, x, c);
            double const w = (q == 0 || q == cells) ? 0.5 * h : h;
            drift += w * integrand.drift;
            raw += w * integrand.raw;
            if (q == 0)
            {
                pair_s = integrand.pair_mean;
            }
            if (q == cells)
            {
                pair_t = integrand.pair_mean;
            }
        }
        return Pair{weight * drift, weight * (pair_t - pair_s + raw)};
    });

    std::vector<double> comp(replications);
    std::vector<double> raw(replications);
    for (std::uint32_t r = 0; r < replications; ++r)
    {
        comp[r] = values[r].compensated;
        raw[r] = values[r].raw;
    }
    std::ostringstream cfg;
    cfg << fns.describe() << ";N=" << n << ";s=" << times.s << ";t=" << times.t << ";history=";
    for (std::size_t k = 0; k < times.history.size(); ++k)
    {
        cfg << (k ? "|" : "") << times.history[k];
    }
    cfg << ";quad_step=" << h;
    MartingaleReport out;
    out.compensated = summarize(comp, cfg.str() + ";estimator=compensated");
    out.raw = summarize(raw, cfg.str() + ";estimator=raw");
    return out;
}

RateFit fit_residuals(std::vector<std::uint32_t> const& sizes,
                      std::vector<ResidualReport> const& reports)
{
    if (sizes.size() != reports.size())
    {
        throw std::invalid_argument("fit_residuals: size mismatch");
    }
    std::vector<RatePoint> points;
    for (std::size_t k = 0; k < sizes.size(); ++k)
    {
        points.push_back(
            {static_cast<double>(sizes[k]), std::abs(reports[k].estimate), reports[k].se});
    }
    return fit_rate(std::move(points));
}

//---------------------------------------------------------------------------//
double spde_residual_single(ModelSpec const& spec, std::uint32_t particles, GridSpec const& grid,
                            Smooth1D const& phi, double t, SeedSpec const& seed,
                            std::uint32_t replication)
{
    GridSpec const sub = truncated(grid, t);
    BrownianPath const w = shared_brownian(seed, replication, sub);
    auto const times = w.times();
    std::size_t const last = times.size() - 1;
    double const sigma = std::sqrt(spec.sigma2());
    double const sig2 = spec.sigma2();
    double const phi0 = phi(0.0);
    double const m = static_cast<double>(particles);

    double first = 0;
    double residual = 0;
    EnsembleSetup setup;
    setup.spec = &spec;
    setup.particles = particles;
    setup.grid = sub;
    setup.seed = seed;
    setup.replication = replication;
    setup.brownian = &w;
    run_ensemble(setup, [&](std::size_t k, double, std::span<double const> x, double v) {
        double mean_phi = 0;
        double mean_d1 = 0;
        double mean_gen = 0;
        for (double xi : x)
        {
            Jet const j = phi.jet(xi);
            mean_phi += j.v;
            mean_d1 += j.d1;
            mean_gen += (phi0 - j.v) * eval_rate(spec.rate, xi) - spec.alpha * xi * j.d1
                        + 0.5 * sig2 * j.d2 * v;
        }
        mean_phi /= m;
        mean_d1 /= m;
        mean_gen /= m;
        if (k == 0)
        {
            first = mean_phi;
        }
        if (k == last)
        {
            residual += mean_phi - first;
            return;
        }
        double const dt = times[k + 1] - times[k];
        double const dw = w.increment(k);
        residual -= mean_d1 * std::sqrt(v) * sigma * dw + mean_gen * dt;
    });
    return residual;
}

ResidualReport spde_residual(ModelSpec const& spec, std::uint32_t particles, GridSpec const& grid,
                             Smooth1D const& phi, double t, SeedSpec const& seed,
                             std::uint32_t replications, unsigned threads)
{
    require_limit_system(spec);
    checked_replications(replications);
    truncated(grid, t);
    auto values = parallel_map(replications, threads, [&](std::size_t r) {
        return spde_residual_single(spec, particles, grid, phi, t, seed,
                                    static_cast<std::uint32_t>(r));
    });
    std::ostringstream cfg;
    cfg << "phi=" << phi.name() << ";M=" << particles << ";dt=" << grid.dt << ";t=" << t
        << ";jump_adapted=" << (grid.jump_adapted ? 1 : 0);
    return summarize(values, cfg.str());
}

//---------------------------------------------------------------------------//
IndependenceReport conditional_independence(ModelSpec const& spec, GridSpec const& grid, double t,
                                            std::uint32_t replications, SeedSpec const& seed,
                                            IndependenceOptions const& options, unsigned threads)
{
    require_limit_system(spec);
    if (replications < 100)
    {
        throw std::invalid_argument("conditional_independence: need at least 100 replications");
    }
    checked_replications(replications + 2);
    GridSpec const sub = truncated(grid, t);
    IndependenceReport out;
    out.replications = replications;
    out.band = 3.0 / std::sqrt(static_cast<double>(replications));

    // Conditional: one path, mu(f) from a large ensemble, R pairs on that path
    {
        BrownianPath const w = shared_brownian(seed, 0, sub);
        EnsembleSetup setup;
        setup.spec = &spec;
        setup.particles = options.reference_particles;
        setup.grid = sub;
        setup.seed = seed;
        setup.replication = 0;
        setup.brownian = &w;
        auto const mu = run_ensemble(setup).mu_f;
        // Pairs run in independent chunks; particle streams are indexed globally
        constexpr std::uint32_t chunk = 256;
        std::uint32_t const chunks = (replications + chunk - 1) / chunk;
        auto parts = parallel_map(chunks, threads, [&](std::size_t b) {
            auto const begin = static_cast<std::uint32_t>(b) * chunk;
            std::uint32_t const count = std::min(chunk, replications - begin);
            return final_states(spec, 2 * count, sub, seed, 1, w, mu, 2 * begin);
        });
        std::vector<double> f1, f2;
        for (auto const& part : parts)
        {
            for (std::size_t p = 0; p + 1 < part.size(); p += 2)
            {
                f1.push_back(eval_rate(spec.rate, part[p]));
                f2.push_back(eval_rate(spec.rate, part[p + 1]));
            }
        }
        out.conditional = correlation(f1, f2);
    }

    if (options.unconditional)
    {
        std::uint32_t const mf = options.unconditional_particles;
        auto pairs = parallel_map(replications, threads, [&](std::size_t r) {
            auto const rep = static_cast<std::uint32_t>(r) + 2;
            BrownianPath const w = shared_brownian(seed, rep, sub);
            EnsembleSetup setup;
            setup.spec = &spec;
            setup.particles = mf;
            setup.grid = sub;
            setup.seed = seed;
            setup.replication = rep;
            setup.brownian = &w;
            auto const mu = run_ensemble(setup).mu_f;
            auto const x = final_states(spec, 2, sub, seed, rep, w, mu, mf);
            return std::pair{eval_rate(spec.rate, x[0]), eval_rate(spec.rate, x[1])};
        });
        std::vector<double> f1, f2;
        for (auto const& [a, b] : pairs)
        {
            f1.push_back(a);
            f2.push_back(b);
        }
        out.unconditional = correlation(f1, f2);
    }
    return out;
}

//---------------------------------------------------------------------------//
bool MomentReport::all_pass() const noexcept
{
    return std::all_of(pass.begin(), pass.end(), [](bool p) { return p; });
}

double second_moment_bound(ModelSpec const& spec, double t)
{
    return spec.initial_law.second_moment() + spec.sigma2() * spec.rate_bound() * t;
}

MomentReport moment_audit(ModelSpec const& spec, std::uint32_t n, std::vector<double> const& t_grid,
                          std::uint32_t replications, SeedSpec const& seed, unsigned threads)
{
    checked_replications(replications);
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) || !(t_grid.front() >= 0))
    {
        throw std::invalid_argument("moment_audit: time grid must be sorted and nonnegative");
    }
    double const horizon = std::max(t_grid.back(), 1e-12);
    std::size_t const nt = t_grid.size();
    auto rows = parallel_map(replications, threads, [&](std::size_t r) {
        FiniteOptions fo;
        fo.replication = static_cast<std::uint32_t>(r);
        auto const traj = simulate_finite(spec, n, horizon, seed, fo);
        FiniteCursor cursor(traj, 0u);
        double sup = std::abs(traj.initial_states()[0]);
        cursor.set_event_hook(
            [&](EventRecord const& e) { sup = std::max(sup, std::abs(cursor.value(0, e.time))); });
        std::vector<double> row(nt + 1);
        for (std::size_t k = 0; k < nt; ++k)
        {
            cursor.advance(t_grid[k]);
            double const v = cursor.value(0, t_grid[k]);
            row[k] = v * v;
        }
        cursor.advance(horizon);
        row[nt] = sup;
        return row;
    });
    MomentReport out;
    out.times = t_grid;
    std::vector<double> column(replications);
    for (std::size_t k = 0; k <= nt; ++k)
    {
        for (std::uint32_t r = 0; r < replications; ++r)
        {
            column[r] = rows[r][k];
        }
        auto const ms = mean_se(column);
        if (k == nt)
        {
            out.sup_abs = ms;
            break;
        }
        out.second_moment.push_back(ms.mean);
        out.se.push_back(ms.se);
        out.bound.push_back(second_moment_bound(spec, t_grid[k]));
        out.pass.push_back(ms.mean <= out.bound.back() + 3 * ms.se);
    }
    return out;
}

ExactnessReport poisson_exactness(ModelSpec const& spec, std::uint32_t n, double horizon,
                                  std::uint32_t replications, SeedSpec const& seed,
                                  unsigned threads)
{
    checked_replications(replications);
    auto const* rate = std::get_if<RateFunction::Constant>(&spec.rate.kind());
    if (rate == nullptr || !(rate->lambda > 0))
    {
        throw std::invalid_argument("poisson_exactness requires a positive constant rate");
    }
    // A gap is kept only if it starts early enough that censoring at the
    // horizon has negligible probability; selection then depends on the past
    // alone and the kept gaps stay exponential.
    double const cutoff = std::max(0.0, horizon - censoring_margin / rate->lambda);
    struct Row
    {
        double count = 0;
        std::vector<double> gaps;
    };
    auto rows = parallel_map(replications, threads, [&](std::size_t r) {
        FiniteOptions fo;
        fo.replication = static_cast<std::uint32_t>(r);
        auto const traj = simulate_finite(spec, n, horizon, seed, fo);
        Row row;
        for (auto const& train : spike_trains(traj))
        {
            row.count += static_cast<double>(train.size());
            double prev = 0;
            for (double s : train)
            {
                if (prev > cutoff)
                {
                    break;
                }
                row.gaps.push_back(s - prev);
                prev = s;
            }
        }
        row.count /= n;
        return row;
    });
    std::vector<double> counts;
    std::vector<double> gaps;
    for (auto& row : rows)
    {
        counts.push_back(row.count);
        gaps.insert(gaps.end(), row.gaps.begin(), row.gaps.end());
    }
    ExactnessReport out;
    out.count = mean_se(counts);
    out.expected = rate->lambda * horizon;
    out.gaps = gaps.size();
    out.ks = ks_exponential(std::move(gaps), rate->lambda);
    out.ks_critical = ks_critical(out.gaps, 0.01);
    return out;
}

IsometryReport martingale_isometry(ModelSpec const& spec, std::uint32_t n, double t,
                                   std::uint32_t replications, SeedSpec const& seed,
                                   double quad_step, unsigned threads)
{
    checked_replications(replications);
    if (!(quad_step > 0) || !(t > 0))
    {
        throw std::invalid_argument("martingale_isometry: t and quad_step must be positive");
    }
    auto const cells = static_cast<std::size_t>(std::max(1.0, std::ceil(t / quad_step - 1e-9)));
    double const h = t / static_cast<double>(cells);
    double const sig2 = spec.sigma2();
    auto rows = parallel_map(replications, threads, [&](std::size_t r) {
        FiniteOptions fo;
        fo.replication = static_cast<std::uint32_t>(r);
        auto const traj = simulate_finite(spec, n, t, seed, fo);
        FiniteCursor cursor(traj);
        std::vector<double> x;
        double integral = 0;
        for (std::size_t q = 0; q < cells; ++q)
        {
            double const mid = (static_cast<double>(q) + 0.5) * h;
            cursor.advance(mid);
            cursor.values(mid, x);
            double sum = 0;
            for (double xi : x)
            {
                sum += eval_rate(spec.rate, xi);
            }
            integral += h * sum / n;
        }
        double const m = small_jump_martingale(traj, t);
        return std::pair{m * m, sig2 * integral};
    });
    std::vector<double> lhs, rhs;
    for (auto const& [a, b] : rows)
    {
        lhs.push_back(a);
        rhs.push_back(b);
    }
    return {mean_se(lhs), mean_se(rhs), paired_difference(lhs, rhs)};
}

JumpWindowReport jump_window(ModelSpec const& spec, std::uint32_t n, double t,
                             std::vector<double> const& eps, std::uint32_t replications,
                             SeedSpec const& seed, unsigned threads)
{
    checked_replications(replications);
    if (eps.empty() || !(eps.back() > 0) || !(t - eps.front() >= 0))
    {
        throw std::invalid_argument("jump_window: need 0 < eps <= t");
    }
    for (std::size_t k = 1; k < eps.size(); ++k)
    {
        if (!(eps[k] < eps[k - 1]))
        {
            throw std::invalid_argument("jump_window: eps must be decreasing");
        }
    }
    std::size_t const ne = eps.size();
    auto rows = parallel_map(replications, threads, [&](std::size_t r) {
        FiniteOptions fo;
        fo.replication = static_cast<std::uint32_t>(r);
        auto const traj = simulate_finite(spec, n, t + eps.front(), seed, fo);
        std::vector<double> hit(ne, 0.0);
        for (auto const& e : traj.events())
        {
            if (!e.accepted || e.neuron != 0)
            {
                continue;
            }
            for (std::size_t k = 0; k < ne; ++k)
            {
                if (e.time > t - eps[k] && e.time < t + eps[k])
                {
                    hit[k] = 1.0;
                }
            }
        }
        return hit;
    });
    JumpWindowReport out;
    out.t = t;
    out.eps = eps;
    std::vector<std::vector<double>> columns(ne, std::vector<double>(replications));
    for (std::uint32_t r = 0; r < replications; ++r)
    {
        for (std::size_t k = 0; k < ne; ++k)
        {
            columns[k][r] = rows[r][k];
        }
    }
    for (std::size_t k = 0; k < ne; ++k)
    {
        out.fraction.push_back(mean_se(columns[k]));
    }
    for (std::size_t k = 0; k + 1 < ne; ++k)
    {
        double const ratio = eps[k + 1] / eps[k];
        out.halving.push_back(paired_difference(columns[k], columns[k + 1], 1.0 / ratio));
        out.halving.back().mean *= ratio;
        out.halving.back().se *= ratio;
    }
    return out;
}

//---------------------------------------------------------------------------//
RateFit marginal_convergence(ModelSpec const& spec, std::vector<std::uint32_t> const& sizes,
                             std::uint32_t limit_particles, GridSpec const& grid, double t,
                             std::uint32_t replications, SeedSpec const& seed, unsigned threads)
{
    require_limit_system(spec);
    checked_replications(replications);
    if (sizes.empty())
    {
        throw std::invalid_argument("marginal_convergence: no sizes");
    }
    GridSpec const sub = truncated(grid, t);
    SeedSpec const limit_seed = relabel(seed, "/limit");
    // Same number of particles per replication on both sides and for every N
    std::uint32_t const keep
        = std::min(*std::min_element(sizes.begin(), sizes.end()), limit_particles);
    auto per_rep = parallel_map(replications, threads, [&](std::size_t r) {
        auto const rep = static_cast<std::uint32_t>(r);
        std::vector<std::vector<double>> out;
        auto limit = sample_limit_marginal(spec, limit_particles, sub, t, limit_seed, rep);
        limit.resize(keep);
        out.push_back(std::move(limit));
        for (auto n : sizes)
        {
            FiniteOptions fo;
            fo.replication = rep;
            auto x = state_at(simulate_finite(spec, n, t, seed, fo), t);
            x.resize(keep);
            out.push_back(std::move(x));
        }
        return out;
    });

    std::uint32_t const batches = std::min(replications, marginal_batches);
    std::vector<std::vector<double>> dist(sizes.size());
    for (std::uint32_t b = 0; b < batches; ++b)
    {
        std::size_t const lo = std::size_t{b} * replications / batches;
        std::size_t const hi = std::size_t{b + 1} * replications / batches;
        auto pool = [&](std::size_t column) {
            std::vector<double> v;
            for (std::size_t r = lo; r < hi; ++r)
            {
                v.insert(v.end(), per_rep[r][column].begin(), per_rep[r][column].end());
            }
            std::sort(v.begin(), v.end());
            return v;
        };
        auto const limit = pool(0);
        for (std::size_t s = 0; s < sizes.size(); ++s)
        {
            dist[s].push_back(wasserstein1(pool(s + 1), limit));
        }
    }
    std::vector<RatePoint> points;
    for (std::size_t s = 0; s < sizes.size(); ++s)
    {
        auto const ms = mean_se(dist[s]);
        points.push_back({static_cast<double>(sizes[s]), ms.mean, ms.se});
    }
    if (points.size() < 3)
    {
        return RateFit{points, std::nullopt};
    }
    return fit_rate(std::move(points));
}

}  // namespace chaosmf
