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

#include "chaosmf/runner.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "chaosmf/analysis.hpp"
#include "chaosmf/errors.hpp"
#include "chaosmf/finite_system.hpp"
#include "chaosmf/limit_system.hpp"
#include "chaosmf/parallel.hpp"

namespace chaosmf {
namespace {

struct Output
{
    CsvTable table;
    Json summary = Json::object();
};

using Row = std::vector<std::string>;

std::string num(double v)
{
    return format_number(v);
}

std::string num(std::uint64_t v)
{
    return std::to_string(v);
}

Json mean_se_json(MeanSE const& m)
{
    return {{"mean", m.mean}, {"se", m.se}};
}

Json fit_json(RateFit const& fit)
{
    Json out;
    out["points"] = Json::array();
    for (auto const& p : fit.points)
    {
        out["points"].push_back({{"size", p.size}, {"estimate", p.estimate}, {"se", p.se}});
    }
    if (fit.fit)
    {
        out["fit"] = {{"slope", fit.fit->slope}, {"intercept", fit.fit->intercept}, {"r2", fit.fit->r2}};
    }
    else
    {
        out["fit"] = nullptr;
    }
    return out;
}

Json correlation_json(Correlation const& c)
{
    Json out{{"defined", c.defined}, {"n", c.n}};
    out["value"] = c.defined ? Json(c.value) : Json(nullptr);
    out["se"] = c.defined ? Json(c.se) : Json(nullptr);
    return out;
}

std::vector<std::uint32_t> counts(Json const& v)
{
    return v.get<std::vector<std::uint32_t>>();
}

GridSpec grid_of(Json const& sim, char const* horizon)
{
    GridSpec g;
    g.horizon = sim.at(horizon).get<double>();
    g.dt = sim.at("dt").get<double>();
    g.jump_adapted = sim.at("jump_adapted").get<bool>();
    g.validate();
    return g;
}

//---------------------------------------------------------------------------//
Output simulate_finite_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const n = sim.at("N").get<std::uint32_t>();
    double const horizon = sim.at("T").get<double>();
    auto const reps = sim.at("R").get<std::uint32_t>();
    FiniteOptions base;
    base.log_rejected = sim.at("log_rejected").get<bool>();
    auto trajectories = parallel_map(reps, threads, [&](std::size_t r) {
        FiniteOptions fo = base;
        fo.replication = static_cast<std::uint32_t>(r);
        return std::optional(simulate_finite(cfg.model, n, horizon, cfg.seed, fo));
    });
    Output out;
    out.table.comment = "replication = replication index, time = event time, neuron = neuron "
                        "index (1-based), mark = jump mark (empty if rejected), pre_state = "
                        "state just before the event, accepted = 1 if the proposal fired";
    out.table.header = {"replication", "time", "neuron", "mark", "pre_state", "accepted"};
    std::uint64_t accepted = 0;
    std::uint64_t proposals = 0;
    for (std::uint32_t r = 0; r < reps; ++r)
    {
        for (auto const& e : trajectories[r]->events())
        {
            out.table.rows.push_back({num(std::uint64_t{r}), num(e.time), num(std::uint64_t{e.neuron} + 1),
                                      e.mark ? num(*e.mark) : std::string{}, num(e.pre_state),
                                      e.accepted ? "1" : "0"});
            ++proposals;
        }
        accepted += trajectories[r]->accepted_count();
    }
    out.summary["N"] = n;
    out.summary["T"] = horizon;
    out.summary["replications"] = reps;
    out.summary["accepted_events"] = accepted;
    out.summary["logged_events"] = proposals;
    return out;
}

Output simulate_meanfield_experiment(ExperimentConfig const& cfg, unsigned)
{
    auto const& sim = cfg.sim;
    GridSpec const grid = grid_of(sim, "T");
    MeanFieldOptions mo;
    mo.replication = sim.at("replication").get<std::uint32_t>();
    mo.store_states = false;
    mo.store_jumps = false;
    auto const particles = sim.at("M").get<std::uint32_t>();
    auto const traj = simulate_mean_field(cfg.model, particles, grid, cfg.seed, mo);
    Output out;
    out.table.comment = "t = grid time, W = common Brownian path, mu_f = ensemble average of "
                        "the rate on the grid step starting at t";
    out.table.header = {"t", "W", "mu_f"};
    auto const times = traj.times();
    auto const w = traj.brownian.values();
    for (std::size_t k = 0; k < times.size(); ++k)
    {
        out.table.rows.push_back({num(times[k]), num(w[k]), num(traj.mu_f[k])});
    }
    out.summary["M"] = particles;
    out.summary["grid_points"] = times.size();
    return out;
}

Output picard_experiment(ExperimentConfig const& cfg, unsigned)
{
    auto const& sim = cfg.sim;
    GridSpec const grid = grid_of(sim, "T");
    PicardOptions po;
    po.replications = sim.at("R").get<std::uint32_t>();
    po.max_iter = sim.at("max_iter").get<int>();
    po.tol = sim.at("tol").get<double>();
    po.stream_replication = sim.at("path_replication").get<std::uint32_t>();
    auto const w = shared_brownian(cfg.seed, po.stream_replication, grid);
    auto const result = picard_solve(cfg.model, w, grid, cfg.seed, po);
    Output out;
    out.table.comment = "iteration = Picard iteration n, delta = mean over replications of the "
                        "sup over grid times of |a(X^n) - a(X^(n-1))|";
    out.table.header = {"iteration", "delta"};
    for (std::size_t n = 0; n < result.delta.size(); ++n)
    {
        out.table.rows.push_back({num(std::uint64_t{n + 1}), num(result.delta[n])});
    }
    out.summary["iterations"] = result.iterations;
    out.summary["converged"] = result.converged;
    out.summary["delta"] = result.delta;
    return out;
}

Output coupling_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const sizes = counts(sim.at("sizes"));
    double const t = sim.at("t").get<double>();
    auto const fit = coupling_distance(cfg.model, sizes, sim.at("M_ref").get<std::uint32_t>(),
                                       grid_of(sim, "t"), t, cfg.seed,
                                       sim.at("R").get<std::uint32_t>(), threads);
    Output out;
    out.table = rate_table(fit, "M");
    out.summary = fit_json(fit);
    return out;
}

Output martingale_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const sizes = counts(sim.at("sizes"));
    MartingaleTimes times;
    times.history = sim.at("history").get<std::vector<double>>();
    times.s = sim.at("s").get<double>();
    times.t = sim.at("t").get<double>();
    try
    {
        times.validate();
    }
    catch (std::invalid_argument const& e)
    {
        throw ValidationError(std::string("sim: ") + e.what());
    }
    TestFunctionSet fns;
    fns.phi.clear();
    for (auto const& pair : sim.at("phi"))
    {
        fns.phi.push_back({Smooth1D::parse(pair[0].get<std::string>()),
                           Smooth1D::parse(pair[1].get<std::string>())});
    }
    fns.chi = Smooth1D::parse(sim.at("chi").get<std::string>());
    fns.psi = Smooth1D::parse(sim.at("psi").get<std::string>());
    MartingaleOptions mo;
    mo.quad_step = sim.at("quad_step").get<double>();
    auto const reps = sim.at("R").get<std::uint32_t>();

    Output out;
    out.table.comment = "N = system size, estimate = mean of the compensated functional, se = "
                        "its standard error, rms = root mean square, raw_estimate and raw_se = "
                        "the functional evaluated literally";
    out.table.header = {"N", "estimate", "se", "rms", "raw_estimate", "raw_se"};
    std::vector<ResidualReport> reports;
    Json per_size = Json::array();
    for (auto n : sizes)
    {
        auto const r = martingale_residual(cfg.model, n, times, fns, reps, cfg.seed, mo, threads);
        out.table.rows.push_back({num(std::uint64_t{n}), num(r.compensated.estimate),
                                  num(r.compensated.se), num(r.compensated.rms),
                                  num(r.raw.estimate), num(r.raw.se)});
        per_size.push_back({{"N", n}, {"configuration", r.compensated.configuration}});
        reports.push_back(r.compensated);
    }
    out.summary["test_functions"] = fns.describe();
    out.summary["phi_constant"] = fns.phi_constant();
    out.summary["runs"] = per_size;
    if (sizes.size() >= 3)
    {
        out.summary["rate"] = fit_json(fit_residuals(sizes, reports));
    }
    return out;
}

Output spde_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const ms = counts(sim.at("M"));
    auto const dts = sim.at("dt").get<std::vector<double>>();
    if (ms.size() != dts.size())
    {
        throw ValidationError("sim.M and sim.dt must have the same length");
    }
    double const t = sim.at("t").get<double>();
    Smooth1D const phi = Smooth1D::parse(sim.at("phi").get<std::string>());
    auto const reps = sim.at("R").get<std::uint32_t>();
    Output out;
    out.table.comment = "M = ensemble size, dt = grid step, estimate = mean weak-form residual, "
                        "se = its standard error, rms = root mean square residual";
    out.table.header = {"M", "dt", "estimate", "se", "rms", "replications"};
    Json runs = Json::array();
    for (std::size_t k = 0; k < ms.size(); ++k)
    {
        GridSpec grid;
        grid.horizon = t;
        grid.dt = dts[k];
        grid.jump_adapted = sim.at("jump_adapted").get<bool>();
        grid.validate();
        auto const r = spde_residual(cfg.model, ms[k], grid, phi, t, cfg.seed, reps, threads);
        out.table.rows.push_back({num(std::uint64_t{ms[k]}), num(dts[k]), num(r.estimate),
                                  num(r.se), num(r.rms), num(std::uint64_t{r.replications})});
        runs.push_back({{"configuration", r.configuration}});
    }
    out.summary["runs"] = runs;
    return out;
}

Output independence_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    IndependenceOptions io;
    io.reference_particles = sim.at("reference_particles").get<std::uint32_t>();
    io.unconditional_particles = sim.at("unconditional_particles").get<std::uint32_t>();
    io.unconditional = sim.at("unconditional").get<bool>();
    double const t = sim.at("t").get<double>();
    auto const r = conditional_independence(cfg.model, grid_of(sim, "t"), t,
                                            sim.at("R").get<std::uint32_t>(), cfg.seed, io, threads);
    Output out;
    out.table.comment = "kind = conditional (one fixed path) or unconditional (fresh path per "
                        "pair), defined = 0 if a variance vanished, value = correlation of "
                        "f-values, se = its standard error, n = pairs";
    out.table.header = {"kind", "defined", "value", "se", "n"};
    auto add = [&](char const* kind, Correlation const& c) {
        out.table.rows.push_back({kind, c.defined ? "1" : "0", c.defined ? num(c.value) : "",
                                  c.defined ? num(c.se) : "", num(std::uint64_t{c.n})});
    };
    add("conditional", r.conditional);
    if (io.unconditional)
    {
        add("unconditional", r.unconditional);
    }
    out.summary["conditional"] = correlation_json(r.conditional);
    if (io.unconditional)
    {
        out.summary["unconditional"] = correlation_json(r.unconditional);
    }
    out.summary["band"] = r.band;
    out.summary["replications"] = r.replications;
    return out;
}

Output moment_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const times = sim.at("times").get<std::vector<double>>();
    Output out;
    out.table.comment = "N = system size, t = time, second_moment = E[(X^1_t)^2] estimate, se = "
                        "its standard error, bound = E[X_0^2] + sigma^2 sup f t, pass = 1 if "
                        "estimate <= bound + 3 se";
    out.table.header = {"N", "t", "second_moment", "se", "bound", "pass"};
    Json sup = Json::array();
    bool all = true;
    for (auto n : counts(sim.at("sizes")))
    {
        auto const r = moment_audit(cfg.model, n, times, sim.at("R").get<std::uint32_t>(), cfg.seed,
                                    threads);
        for (std::size_t k = 0; k < r.times.size(); ++k)
        {
            out.table.rows.push_back({num(std::uint64_t{n}), num(r.times[k]),
                                      num(r.second_moment[k]), num(r.se[k]), num(r.bound[k]),
                                      r.pass[k] ? "1" : "0"});
        }
        sup.push_back({{"N", n}, {"sup_abs", mean_se_json(r.sup_abs)}});
        all = all && r.all_pass();
    }
    out.summary["all_pass"] = all;
    out.summary["sup_abs"] = sup;
    return out;
}

Output marginal_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    double const t = sim.at("t").get<double>();
    auto const fit = marginal_convergence(cfg.model, counts(sim.at("sizes")),
                                          sim.at("limit_particles").get<std::uint32_t>(),
                                          grid_of(sim, "t"), t, sim.at("R").get<std::uint32_t>(),
                                          cfg.seed, threads);
    Output out;
    out.table = rate_table(fit, "N");
    out.table.comment += " (1-Wasserstein distance between finite and limit marginals)";
    out.summary = fit_json(fit);
    return out;
}

Output exactness_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const r = poisson_exactness(cfg.model, sim.at("N").get<std::uint32_t>(),
                                     sim.at("T").get<double>(), sim.at("R").get<std::uint32_t>(),
                                     cfg.seed, threads);
    Output out;
    out.table.comment = "mean_count = spikes per neuron, count_se = its standard error, expected "
                        "= lambda T, ks = KS statistic of pooled inter-spike times against "
                        "exponential(lambda), ks_critical = 1% critical value, gaps = sample size";
    out.table.header = {"mean_count", "count_se", "expected", "ks", "ks_critical", "gaps"};
    out.table.rows.push_back({num(r.count.mean), num(r.count.se), num(r.expected), num(r.ks),
                              num(r.ks_critical), num(std::uint64_t{r.gaps})});
    out.summary["count"] = mean_se_json(r.count);
    out.summary["expected"] = r.expected;
    out.summary["ks"] = r.ks;
    out.summary["ks_critical"] = r.ks_critical;
    return out;
}

Output isometry_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const r = martingale_isometry(cfg.model, sim.at("N").get<std::uint32_t>(),
                                       sim.at("t").get<double>(), sim.at("R").get<std::uint32_t>(),
                                       cfg.seed, sim.at("quad_step").get<double>(), threads);
    Output out;
    out.table.comment = "lhs = E[M_t^2], rhs = sigma^2 E[int_0^t mu_s(f) ds], difference = paired "
                        "lhs - rhs; *_se are standard errors";
    out.table.header = {"lhs", "lhs_se", "rhs", "rhs_se", "difference", "difference_se"};
    out.table.rows.push_back({num(r.lhs.mean), num(r.lhs.se), num(r.rhs.mean), num(r.rhs.se),
                              num(r.difference.mean), num(r.difference.se)});
    out.summary["lhs"] = mean_se_json(r.lhs);
    out.summary["rhs"] = mean_se_json(r.rhs);
    out.summary["difference"] = mean_se_json(r.difference);
    return out;
}

Output jump_window_experiment(ExperimentConfig const& cfg, unsigned threads)
{
    auto const& sim = cfg.sim;
    auto const r = jump_window(cfg.model, sim.at("N").get<std::uint32_t>(),
                               sim.at("t").get<double>(), sim.at("eps").get<std::vector<double>>(),
                               sim.at("R").get<std::uint32_t>(), cfg.seed, threads);
    Output out;
    out.table.comment = "eps = window half-width, fraction = share of replications with an "
                        "accepted event of neuron 1 in (t - eps, t + eps), se = its standard "
                        "error, halving = paired fraction/2 minus the next fraction, halving_se "
                        "= its standard error";
    out.table.header = {"eps", "fraction", "se", "halving", "halving_se"};
    for (std::size_t k = 0; k < r.eps.size(); ++k)
    {
        bool const h = k < r.halving.size();
        out.table.rows.push_back({num(r.eps[k]), num(r.fraction[k].mean), num(r.fraction[k].se),
                                  h ? num(r.halving[k].mean) : "", h ? num(r.halving[k].se) : ""});
    }
    out.summary["t"] = r.t;
    return out;
}

using Experiment = std::function<Output(ExperimentConfig const&, unsigned)>;

std::map<std::string, Experiment> const& dispatch()
{
    static std::map<std::string, Experiment> const table = {
        {"simulate-finite", simulate_finite_experiment},
        {"simulate-meanfield", simulate_meanfield_experiment},
        {"picard", picard_experiment},
        {"coupling-rate", coupling_experiment},
        {"martingale-residual", martingale_experiment},
        {"spde-residual", spde_experiment},
        {"cond-independence", independence_experiment},
        {"moment-audit", moment_experiment},
        {"marginal-convergence", marginal_experiment},
        {"exactness", exactness_experiment},
        {"isometry", isometry_experiment},
        {"jump-window", jump_window_experiment},
    };
    return table;
}

void check_assumptions(ExperimentConfig const& cfg)
{
    auto const report = validate_model(cfg.model);
    bool const ok = experiment_needs_limit(cfg.experiment) ? report.limit_system_ok()
                                                            : report.finite_system_ok();
    if (!ok)
    {
        std::vector<std::string> failed;
        std::string names;
        for (auto const* c : {&report.lipschitz, &report.centered, &report.contraction})
        {
            if (!c->passed)
            {
                failed.push_back(c->name);
                names += (names.empty() ? "" : ", ") + c->name;
            }
        }
        throw AssumptionError("model violates " + names + " (required by '" + cfg.experiment
                                  + "')\n" + report.summary(),
                              failed);
    }
}

std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ValidationError(path.string() + ": cannot open config file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(std::filesystem::path const& path, std::string const& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out)
    {
        throw std::runtime_error(path.string() + ": write failed");
    }
}

}  // namespace

//---------------------------------------------------------------------------//
std::string format_number(double value)
{
    if (value == 0)
    {
        return "0";
    }
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string CsvTable::str() const
{
    std::string out = "# " + comment + "\n";
    auto line = [&out](std::vector<std::string> const& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            out += (i ? "," : "") + cells[i];
        }
        out += '\n';
    };
    line(header);
    for (auto const& row : rows)
    {
        line(row);
    }
    return out;
}

CsvTable rate_table(RateFit const& fit, std::string const& size_name)
{
    CsvTable t;
    t.comment = size_name + " = size, estimate = Monte Carlo mean, se = standard error";
    t.header = {size_name, "estimate", "se"};
    for (auto const& p : fit.points)
    {
        t.rows.push_back({format_number(p.size), format_number(p.estimate), format_number(p.se)});
    }
    return t;
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    {
        throw std::runtime_error("sha256 failed");
    }
    static char const* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

RunResult run(RunRequest const& request)
{
    RunResult result;
    auto const start = std::chrono::steady_clock::now();
    try
    {
        ConfigSource source;
        if (!request.config_path.empty())
        {
            source = ConfigSource(read_file(request.config_path), request.config_path);
        }
        Json raw = request.config_path.empty() ? Json::object() : source.parse();
        if (!raw.is_object())
        {
            throw ValidationError(source.name() + ": top level must be an object");
        }
        for (auto const& o : request.overrides)
        {
            apply_override(raw, o, source);
        }
        if (request.seed)
        {
            apply_override(raw, "seed.master=" + std::to_string(*request.seed), source);
        }
        if (request.out_dir)
        {
            raw["output"]["dir"] = *request.out_dir;
            source.mark_overridden("output.dir");
        }
        auto const cfg = resolve_config(raw, request.experiment, source);
        check_assumptions(cfg);
        unsigned const threads = resolve_threads(request.threads.value_or(0));

        auto const output = dispatch().at(cfg.experiment)(cfg, threads);

        result.out_dir = cfg.out_dir;
        std::filesystem::create_directories(result.out_dir);
        std::string const csv = output.table.str();
        Json summary = output.summary;
        summary["experiment"] = cfg.experiment;
        std::string const summary_text = summary.dump(2) + "\n";
        write_file(result.out_dir / "results.csv", csv);
        write_file(result.out_dir / "summary.json", summary_text);

        Json manifest;
        manifest["version"] = library_version;
        manifest["config"] = cfg.echo;
        manifest["overrides"] = request.overrides;
        manifest["threads"] = threads;
        manifest["wall_clock_seconds"]
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest["checksums"] = {{"results.csv", sha256_hex(csv)},
                                 {"summary.json", sha256_hex(summary_text)}};
        write_file(result.out_dir / "manifest.json", manifest.dump(2) + "\n");
        result.message = "wrote " + (result.out_dir / "results.csv").string();
    }
    catch (AssumptionError const& e)
    {
        result.exit_code = 1;
        result.message = std::string("assumption failure: ") + e.what();
    }
    catch (ValidationError const& e)
    {
        result.exit_code = 1;
        result.message = std::string("invalid configuration: ") + e.what();
    }
    catch (std::invalid_argument const& e)
    {
        result.exit_code = 1;
        result.message = std::string("invalid parameters: ") + e.what();
    }
    catch (std::exception const& e)
    {
        result.exit_code = 2;
        result.message = std::string("runtime failure: ") + e.what();
    }
    return result;
}

}  // namespace chaosmf
