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

// Runs the shipped presets and prints one PASS/FAIL line per acceptance
// criterion. Exit status is 0 only if every criterion passes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "chaosmf/runner.hpp"

#ifndef CHAOSMF_CONFIG_DIR
#    define CHAOSMF_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using chaosmf::Json;

namespace {

struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(std::string const& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
        {
            if (header[i] == name)
            {
                return i;
            }
        }
        throw std::runtime_error("missing column " + name);
    }
    double num(std::size_t row, std::string const& name) const
    {
        return std::stod(rows.at(row).at(col(name)));
    }
};

std::vector<std::string> split(std::string const& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
    {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',')
    {
        out.emplace_back();
    }
    return out;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run
{
    Table table;
    Json summary;
    fs::path dir;
};

class Harness
{
public:
    Harness(fs::path configs, fs::path out) : configs_(std::move(configs)), out_(std::move(out)) {}

    Run run(std::string const& preset, std::optional<int> threads = std::nullopt,
            std::string const& suffix = "")
    {
        fs::path const cfg = configs_ / (preset + ".json");
        auto const raw = Json::parse(slurp(cfg));
        chaosmf::RunRequest req;
        req.experiment = raw.at("experiment").get<std::string>();
        req.config_path = cfg.string();
        req.out_dir = (out_ / (preset + suffix)).string();
        req.threads = threads;
        auto const res = chaosmf::run(req);
        if (res.exit_code != 0)
        {
            throw std::runtime_error(preset + ": " + res.message);
        }
        Run r;
        r.dir = res.out_dir;
        std::istringstream csv(slurp(r.dir / "results.csv"));
        std::string line;
        while (std::getline(csv, line))
        {
            if (line.empty() || line[0] == '#')
            {
                continue;
            }
            if (r.table.header.empty())
            {
                r.table.header = split(line);
            }
            else
            {
                r.table.rows.push_back(split(line));
            }
        }
        r.summary = Json::parse(slurp(r.dir / "summary.json"));
        return r;
    }

private:
    fs::path configs_;
    fs::path out_;
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Verdict
{
    bool pass = false;
    std::string detail;
};

}  // namespace

int main(int argc, char** argv)
{
    fs::path const configs = argc > 1 ? fs::path(argv[1]) : fs::path(CHAOSMF_CONFIG_DIR);
    fs::path const out = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "chaosmf-acceptance";
    Harness h(configs, out);

    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;

    criteria.emplace_back("C1 exactness oracle (constant rate)", [&] {
        auto const r = h.run("c1_exactness");
        auto const& t = r.table;
        double const mean = t.num(0, "mean_count"), se = t.num(0, "count_se");
        double const expected = t.num(0, "expected");
        double const ks = t.num(0, "ks"), crit = t.num(0, "ks_critical");
        bool const pass = std::abs(mean - expected) <= 3 * se && ks < crit;
        return Verdict{pass, "count " + fmt(mean) + " +- " + fmt(se) + " vs " + fmt(expected)
                                 + ", KS " + fmt(ks) + " vs critical " + fmt(crit)};
    });

    criteria.emplace_back("C2 second-moment bound", [&] {
        auto const r = h.run("c2_moment_audit");
        auto const& t = r.table;
        bool pass = !t.rows.empty();
        double worst = -1e300;
        for (std::size_t i = 0; i < t.rows.size(); ++i)
        {
            double const slack = t.num(i, "second_moment") - t.num(i, "bound") - 3 * t.num(i, "se");
            worst = std::max(worst, slack);
            pass = pass && slack <= 0;
        }
        return Verdict{pass, std::to_string(t.rows.size()) + " grid points, max(estimate - bound - 3se) = "
                                 + fmt(worst)};
    });

    criteria.emplace_back("C3 martingale isometry", [&] {
        auto const r = h.run("c3_isometry");
        auto const& t = r.table;
        double const d = t.num(0, "difference"), se = t.num(0, "difference_se");
        return Verdict{std::abs(d) <= 3 * se, "E[M^2] " + fmt(t.num(0, "lhs")) + ", sigma^2 E[int mu(f)] "
                                                  + fmt(t.num(0, "rhs")) + ", paired difference "
                                                  + fmt(d) + " +- " + fmt(se)};
    });

    criteria.emplace_back("C4 coupling rate", [&] {
        auto const r = h.run("c4_coupling");
        auto const c = h.run("c4_coupling_control");
        auto const& fit = r.summary.at("fit");
        if (fit.is_null())
        {
            return Verdict{false, "no fit (nonpositive estimate)"};
        }
        double const slope = fit.at("slope").get<double>(), r2 = fit.at("r2").get<double>();
        bool monotone = true;
        for (std::size_t i = 1; i < r.table.rows.size(); ++i)
        {
            double const prev = r.table.num(i - 1, "estimate");
            double const cur = r.table.num(i, "estimate");
            double const se = std::hypot(r.table.num(i - 1, "se"), r.table.num(i, "se"));
            monotone = monotone && cur <= prev + 2 * se;
        }
        bool zero = !c.table.rows.empty();
        for (std::size_t i = 0; i < c.table.rows.size(); ++i)
        {
            zero = zero && c.table.num(i, "estimate") == 0.0;
        }
        bool const pass = slope >= -0.7 && slope <= -0.3 && r2 >= 0.9 && monotone && zero;
        return Verdict{pass, "slope " + fmt(slope) + ", R^2 " + fmt(r2) + ", nonincreasing "
                                 + (monotone ? "yes" : "no") + ", constant-rate control "
                                 + (zero ? "exactly 0" : "NONZERO")};
    });

    criteria.emplace_back("C5 martingale-problem residual", [&] {
        auto const r = h.run("c5_martingale");
        auto const c = h.run("c5_martingale_control");
        auto const& fit = r.summary.at("rate").at("fit");
        if (fit.is_null())
        {
            return Verdict{false, "no fit"};
        }
        double const slope = fit.at("slope").get<double>();
        bool decreasing = true;
        for (std::size_t i = 1; i < r.table.rows.size(); ++i)
        {
            decreasing = decreasing
                         && std::abs(r.table.num(i, "estimate")) < std::abs(r.table.num(i - 1, "estimate"));
        }
        bool zero = !c.table.rows.empty();
        for (std::size_t i = 0; i < c.table.rows.size(); ++i)
        {
            zero = zero && c.table.num(i, "estimate") == 0.0;
        }
        bool const pass = slope >= -0.8 && slope <= -0.2 && decreasing && zero;
        return Verdict{pass, "|residual| " + fmt(std::abs(r.table.num(0, "estimate"))) + " -> "
                                 + fmt(std::abs(r.table.num(r.table.rows.size() - 1, "estimate")))
                                 + ", slope " + fmt(slope) + ", decreasing "
                                 + (decreasing ? "yes" : "no") + ", constant-phi control "
                                 + (zero ? "exactly 0" : "NONZERO")};
    });

    criteria.emplace_back("C6 conditional independence", [&] {
        auto const r = h.run("c6_independence");
        auto const& s = r.summary;
        double const band = s.at("band").get<double>();
        auto const& cond = s.at("conditional");
        auto const& uncond = s.at("unconditional");
        if (!cond.at("defined").get<bool>() || !uncond.at("defined").get<bool>())
        {
            return Verdict{false, "correlation undefined"};
        }
        double const rc = cond.at("value").get<double>(), ru = uncond.at("value").get<double>();
        return Verdict{std::abs(rc) <= band && std::abs(ru) > band,
                       "fixed-path correlation " + fmt(rc) + ", averaged " + fmt(ru) + ", band "
                           + fmt(band)};
    });

    criteria.emplace_back("C7 weak-form residual", [&] {
        auto const r = h.run("c7_spde");
        auto const& t = r.table;
        std::size_t const last = t.rows.size() - 1;
        double const est = t.num(last, "estimate"), se = t.num(last, "se");
        double const ratio = t.num(0, "rms") / t.num(last, "rms");
        bool const pass = t.rows.size() >= 2 && std::abs(est) <= 3 * se && ratio >= 1.3;
        return Verdict{pass, "mean " + fmt(est) + " +- " + fmt(se) + " at M="
                                 + t.rows[last][t.col("M")] + ", RMS ratio " + fmt(ratio)};
    });

    criteria.emplace_back("C8 Picard contraction", [&] {
        auto const r = h.run("c8_picard");
        auto const c = h.run("c8_picard_control");
        auto const& t = r.table;
        bool pass = t.rows.size() >= 5;
        double worst = 0;
        for (std::size_t n = 2; n <= 5 && n <= t.rows.size(); ++n)
        {
            double const ratio = t.num(n - 1, "delta") / t.num(n - 2, "delta");
            worst = std::max(worst, ratio);
            pass = pass && ratio <= 0.75;
        }
        bool const zero = c.table.rows.size() >= 2 && c.table.num(1, "delta") == 0.0;
        return Verdict{pass && zero, "max ratio n=2..5 " + fmt(worst) + ", constant-rate delta^2 "
                                         + (zero ? "exactly 0" : "NONZERO")};
    });

    criteria.emplace_back("C9 fixed-time no-jump window", [&] {
        auto const r = h.run("c9_jump_window");
        auto const& t = r.table;
        bool pass = t.rows.size() >= 2;
        std::string detail;
        for (std::size_t i = 0; i + 1 < t.rows.size(); ++i)
        {
            double const d = t.num(i, "halving"), se = t.num(i, "halving_se");
            pass = pass && std::abs(d) <= 2 * se;
            detail += (detail.empty() ? "" : "; ") + std::string("eps ") + t.rows[i][0] + ": "
                      + fmt(d) + " +- " + fmt(se);
        }
        return Verdict{pass, "fraction/2 - next " + detail};
    });

    criteria.emplace_back("C10 determinism across thread counts", [&] {
        bool pass = true;
        std::string detail;
        for (std::string preset : {"c1_exactness", "c6_independence"})
        {
            auto const a = h.run(preset, 1, "-t1");
            auto const b = h.run(preset, 3, "-t3");
            bool const same = slurp(a.dir / "results.csv") == slurp(b.dir / "results.csv");
            pass = pass && same;
            detail += (detail.empty() ? "" : ", ") + preset + (same ? " identical" : " DIFFERS");
        }
        return Verdict{pass, "threads 1 vs 3: " + detail};
    });

    int failures = 0;
    for (auto const& [name, check] : criteria)
    {
        Verdict v;
        try
        {
            v = check();
        }
        catch (std::exception const& e)
        {
            v = {false, std::string("error: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria pass"
              << std::endl;
    return failures == 0 ? 0 : 1;
}
