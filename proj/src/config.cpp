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

#include "chaosmf/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "chaosmf/errors.hpp"

namespace chaosmf {
namespace {

enum class Type
{
    number,
    positive,
    count,
    index,
    flag,
    text,
    numbers,
    counts,
    pairs,
};

struct Param
{
    char const* name;
    Type type;
    Json fallback;
};

using Table = std::vector<Param>;

std::map<std::string, Table> const& experiments()
{
    static std::map<std::string, Table> const table = {
        {"simulate-finite",
         {{"N", Type::count, 64},
          {"T", Type::positive, 1.0},
          {"R", Type::count, 1},
          {"log_rejected", Type::flag, false}}},
        {"simulate-meanfield",
         {{"M", Type::count, 1024},
          {"T", Type::positive, 1.0},
          {"dt", Type::positive, 1e-2},
          {"jump_adapted", Type::flag, true},
          {"replication", Type::index, 0}}},
        {"picard",
         {{"T", Type::positive, 0.25},
          {"dt", Type::positive, 1e-3},
          {"jump_adapted", Type::flag, true},
          {"R", Type::count, 500},
          {"max_iter", Type::count, 20},
          {"tol", Type::positive, 1e-3},
          {"path_replication", Type::index, 0}}},
        {"coupling-rate",
         {{"sizes", Type::counts, {64, 128, 256, 512, 1024, 2048}},
          {"M_ref", Type::count, 8192},
          {"t", Type::positive, 1.0},
          {"dt", Type::positive, 1e-2},
          {"jump_adapted", Type::flag, true},
          {"R", Type::count, 200}}},
        {"martingale-residual",
         {{"sizes", Type::counts, {32, 64, 128, 256, 512, 1024}},
          {"history", Type::numbers, {0.1}},
          {"s", Type::number, 0.25},
          {"t", Type::positive, 0.5},
          {"R", Type::count, 2000},
          {"quad_step", Type::positive, 5e-3},
          {"phi", Type::pairs, Json::array({Json::array({"sin", "cos"})})},
          {"chi", Type::text, "tanh"},
          {"psi", Type::text, "identity"}}},
        {"spde-residual",
         {{"M", Type::counts, {2048}},
          {"dt", Type::numbers, {1e-3}},
          {"t", Type::positive, 1.0},
          {"jump_adapted", Type::flag, true},
          {"phi", Type::text, "sin"},
          {"R", Type::count, 400}}},
        {"cond-independence",
         {{"t", Type::positive, 1.0},
          {"dt", Type::positive, 1e-2},
          {"jump_adapted", Type::flag, true},
          {"R", Type::count, 2000},
          {"reference_particles", Type::count, 4096},
          {"unconditional_particles", Type::count, 256},
          {"unconditional", Type::flag, true}}},
        {"moment-audit",
         {{"sizes", Type::counts, {16, 256}},
          {"times", Type::numbers, {0.5, 1.0, 2.0}},
          {"R", Type::count, 5000}}},
        {"marginal-convergence",
         {{"sizes", Type::counts, {2, 4, 8, 16, 32, 64}},
          {"limit_particles", Type::count, 512},
          {"t", Type::positive, 1.0},
          {"dt", Type::positive, 1e-2},
          {"jump_adapted", Type::flag, true},
          {"R", Type::count, 2000}}},
        {"exactness",
         {{"N", Type::count, 1}, {"T", Type::positive, 20.0}, {"R", Type::count, 10000}}},
        {"isometry",
         {{"N", Type::count, 256},
          {"t", Type::positive, 1.0},
          {"R", Type::count, 10000},
          {"quad_step", Type::positive, 5e-3}}},
        {"jump-window",
         {{"N", Type::count, 8},
          {"t", Type::positive, 1.0},
          {"eps", Type::numbers, {0.04, 0.02, 0.01}},
          {"R", Type::count, 100000}}},
    };
    return table;
}

std::vector<std::string> split_path(std::string const& dotted)
{
    std::vector<std::string> out;
    std::string part;
    std::istringstream in(dotted);
    while (std::getline(in, part, '.'))
    {
        out.push_back(part);
    }
    return out;
}

//! Schema reader for one JSON object
class Reader
{
public:
    Reader(Json const& obj, std::string path, ConfigSource const& src)
        : obj_(obj), path_(std::move(path)), src_(src)
    {
        if (!obj_.is_object())
        {
            fail(path_, "expected an object");
        }
    }

    [[noreturn]] void fail(std::string const& at, std::string const& msg) const
    {
        throw ValidationError(src_.where(at) + at + ": " + msg);
    }

    std::string child(std::string const& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

    void allow(std::vector<std::string> const& keys) const
    {
        for (auto const& item : obj_.items())
        {
            if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
            {
                fail(child(item.key()), "unknown key");
            }
        }
    }

    bool has(std::string const& key) const { return obj_.contains(key); }

    Json const& raw(std::string const& key) const { return obj_.at(key); }

    double number(std::string const& key, double fallback) const
    {
        if (!has(key))
        {
            return fallback;
        }
        auto const& v = obj_.at(key);
        if (!v.is_number() || !std::isfinite(v.get<double>()))
        {
            fail(child(key), "expected a finite number");
        }
        return v.get<double>();
    }

    std::vector<double> numbers(std::string const& key) const
    {
        auto const& v = obj_.at(key);
        if (!v.is_array())
        {
            fail(child(key), "expected an array of numbers");
        }
        std::vector<double> out;
        for (auto const& e : v)
        {
            if (!e.is_number() || !std::isfinite(e.get<double>()))
            {
                fail(child(key), "expected an array of finite numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string text(std::string const& key) const
    {
        auto const& v = obj_.at(key);
        if (!v.is_string())
        {
            fail(child(key), "expected a string");
        }
        return v.get<std::string>();
    }

private:
    Json const& obj_;
    std::string path_;
    ConfigSource const& src_;
};

std::uint64_t integer_value(Json const& v, bool allow_zero, Reader const& r, std::string const& at)
{
    if (!v.is_number_unsigned())
    {
        r.fail(at, allow_zero ? "expected a nonnegative integer" : "expected a positive integer");
    }
    auto const u = v.get<std::uint64_t>();
    if ((!allow_zero && u == 0) || u > std::numeric_limits<std::uint32_t>::max())
    {
        r.fail(at, "integer out of range");
    }
    return u;
}

Json check_param(Param const& p, Json const& v, Reader const& r)
{
    std::string const at = r.child(p.name);
    switch (p.type)
    {
    case Type::number:
        r.number(p.name, 0);
        return v;
    case Type::positive:
        if (!(r.number(p.name, 0) > 0))
        {
            r.fail(at, "expected a positive number");
        }
        return v;
    case Type::count:
        integer_value(v, false, r, at);
        return v;
    case Type::index:
        integer_value(v, true, r, at);
        return v;
    case Type::flag:
        if (!v.is_boolean())
        {
            r.fail(at, "expected true or false");
        }
        return v;
    case Type::text:
        r.text(p.name);
        return v;
    case Type::numbers:
        if (r.numbers(p.name).empty())
        {
            r.fail(at, "expected a nonempty array");
        }
        return v;
    case Type::counts:
        if (!v.is_array() || v.empty())
        {
            r.fail(at, "expected a nonempty array of positive integers");
        }
        for (auto const& e : v)
        {
            integer_value(e, false, r, at);
        }
        return v;
    case Type::pairs:
        if (!v.is_array() || v.empty())
        {
            r.fail(at, "expected a nonempty array of [g, h] name pairs");
        }
        for (auto const& e : v)
        {
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            {
                r.fail(at, "expected a nonempty array of [g, h] name pairs");
            }
        }
        return v;
    }
    return v;
}

template <class Fn>
auto located(Reader const& r, std::string const& at, Fn&& fn)
{
    try
    {
        return fn();
    }
    catch (ValidationError const& e)
    {
        r.fail(at, e.what());
    }
}

RateFunction rate_from(Reader const& r, std::string const& path)
{
    std::string const kind = r.has("kind") ? r.text("kind") : "arctan";
    if (kind == "arctan")
    {
        r.allow({"kind", "c", "d"});
        return located(r, path, [&] { return RateFunction::arctan(r.number("c", 3.0), r.number("d", 1.0)); });
    }
    if (kind == "constant")
    {
        r.allow({"kind", "lambda"});
        return located(r, path, [&] { return RateFunction::constant(r.number("lambda", 1.0)); });
    }
    if (kind == "table")
    {
        r.allow({"kind", "breakpoints", "values", "lipschitz"});
        if (!r.has("breakpoints") || !r.has("values") || !r.has("lipschitz"))
        {
            r.fail(path, "table rate needs breakpoints, values and lipschitz");
        }
        return located(r, path, [&] {
            return RateFunction::table(r.numbers("breakpoints"), r.numbers("values"),
                                       r.number("lipschitz", 0));
        });
    }
    r.fail(r.child("kind"), "unknown rate kind '" + kind + "'");
}

MarkLaw marks_from(Reader const& r, std::string const& path)
{
    std::string const kind = r.has("kind") ? r.text("kind") : "rademacher";
    if (kind == "rademacher")
    {
        r.allow({"kind", "h"});
        return located(r, path, [&] { return MarkLaw::rademacher(r.number("h", 1.0)); });
    }
    if (kind == "uniform")
    {
        r.allow({"kind", "b"});
        return located(r, path, [&] { return MarkLaw::uniform(r.number("b", 1.0)); });
    }
    if (kind == "gaussian")
    {
        r.allow({"kind", "s"});
        return located(r, path, [&] { return MarkLaw::gaussian(r.number("s", 1.0)); });
    }
    if (kind == "discrete")
    {
        r.allow({"kind", "points", "weights"});
        if (!r.has("points") || !r.has("weights"))
        {
            r.fail(path, "discrete marks need points and weights");
        }
        return located(r, path, [&] { return MarkLaw::discrete(r.numbers("points"), r.numbers("weights")); });
    }
    r.fail(r.child("kind"), "unknown mark kind '" + kind + "'");
}

InitialLaw initial_from(Reader const& r, std::string const& path)
{
    std::string const kind = r.has("kind") ? r.text("kind") : "point";
    if (kind == "point")
    {
        r.allow({"kind", "x0"});
        return located(r, path, [&] { return InitialLaw::point_mass(r.number("x0", 0.0)); });
    }
    if (kind == "uniform")
    {
        r.allow({"kind", "a", "b"});
        return located(r, path, [&] { return InitialLaw::uniform(r.number("a", 0.0), r.number("b", 1.0)); });
    }
    if (kind == "gaussian")
    {
        r.allow({"kind", "m", "s"});
        return located(r, path, [&] { return InitialLaw::gaussian(r.number("m", 0.0), r.number("s", 1.0)); });
    }
    r.fail(r.child("kind"), "unknown initial kind '" + kind + "'");
}

DistanceFunction distance_from(Reader const& r, std::string const& path)
{
    std::string const kind = r.has("kind") ? r.text("kind") : "same_as_rate";
    if (kind == "same_as_rate")
    {
        r.allow({"kind"});
        return DistanceFunction::same_as_rate();
    }
    if (kind == "table")
    {
        r.allow({"kind", "breakpoints", "values"});
        if (!r.has("breakpoints") || !r.has("values"))
        {
            r.fail(path, "table distance needs breakpoints and values");
        }
        return located(r, path, [&] {
            return DistanceFunction::table(r.numbers("breakpoints"), r.numbers("values"));
        });
    }
    r.fail(r.child("kind"), "unknown distance kind '" + kind + "'");
}

Json numbers_json(std::vector<double> const& v)
{
    Json out = Json::array();
    for (double x : v)
    {
        out.push_back(x);
    }
    return out;
}

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

//---------------------------------------------------------------------------//
ConfigSource::ConfigSource(std::string text, std::string name)
    : text_(std::move(text)), name_(std::move(name))
{
}

Json ConfigSource::parse() const
{
    try
    {
        return Json::parse(text_);
    }
    catch (Json::parse_error const& e)
    {
        // Recover line and column from the byte offset
        std::size_t const end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text_.size());
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < end; ++i)
        {
            if (text_[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
            {
                ++col;
            }
        }
        std::string msg = e.what();
        if (auto pos = msg.find("syntax error"); pos != std::string::npos)
        {
            msg = msg.substr(pos);
        }
        throw ValidationError(name_ + ":" + std::to_string(line) + ":" + std::to_string(col)
                              + ": invalid JSON: " + msg);
    }
}

std::string ConfigSource::where(std::string const& dotted) const
{
    for (auto const& o : overridden_)
    {
        if (dotted == o || dotted.rfind(o + ".", 0) == 0)
        {
            return "--set " + o + ": ";
        }
    }
    // Follow the key chain through the text to find the line of the innermost key
    std::size_t offset = 0;
    bool found = false;
    for (auto const& key : split_path(dotted))
    {
        std::string const quoted = "\"" + key + "\"";
        std::size_t pos = offset;
        while ((pos = text_.find(quoted, pos)) != std::string::npos)
        {
            std::size_t k = pos + quoted.size();
            while (k < text_.size() && std::isspace(static_cast<unsigned char>(text_[k])))
            {
                ++k;
            }
            if (k < text_.size() && text_[k] == ':')
            {
                break;
            }
            pos += quoted.size();
        }
        if (pos == std::string::npos)
        {
            break;
        }
        offset = pos;
        found = true;
    }
    if (!found)
    {
        return name_ + ": ";
    }
    auto const line = 1 + std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    return name_ + ":" + std::to_string(line) + ": ";
}

//---------------------------------------------------------------------------//
void apply_override(Json& config, std::string const& assignment, ConfigSource& source)
{
    auto const eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
    {
        throw ValidationError("--set " + assignment + ": expected KEY=VALUE");
    }
    std::string const key = assignment.substr(0, eq);
    std::string const text = assignment.substr(eq + 1);
    auto const parts = split_path(key);
    if (std::any_of(parts.begin(), parts.end(), [](auto const& p) { return p.empty(); }))
    {
        throw ValidationError("--set " + key + ": empty path component");
    }
    Json value;
    try
    {
        value = Json::parse(text);
    }
    catch (Json::parse_error const&)
    {
        value = text;
    }
    Json* node = &config;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    {
        if (!node->is_object())
        {
            throw ValidationError("--set " + key + ": cannot descend into a non-object");
        }
        node = &(*node)[parts[i]];
        if (node->is_null())
        {
            *node = Json::object();
        }
    }
    if (!node->is_object())
    {
        throw ValidationError("--set " + key + ": parent is not an object");
    }
    (*node)[parts.back()] = std::move(value);
    source.mark_overridden(key);
}

std::vector<std::string> const& experiment_names()
{
    static std::vector<std::string> const names = [] {
        std::vector<std::string> out;
        for (auto const& [name, _] : experiments())
        {
            out.push_back(name);
        }
        return out;
    }();
    return names;
}

bool experiment_needs_limit(std::string const& experiment)
{
    static std::set<std::string> const limit = {"simulate-meanfield", "picard",
                                                "coupling-rate",      "spde-residual",
                                                "cond-independence",  "marginal-convergence"};
    return limit.count(experiment) > 0;
}

//---------------------------------------------------------------------------//
ModelSpec model_from_json(Json const& model, ConfigSource const& source, std::string const& path)
{
    Reader const r(model, path, source);
    r.allow({"alpha", "rate", "marks", "initial", "distance", "allow_zero_inf_rate"});
    ModelSpec spec;
    spec.alpha = r.number("alpha", 1.0);
    if (!(spec.alpha > 0))
    {
        r.fail(r.child("alpha"), "alpha must be positive");
    }
    if (r.has("rate"))
    {
        spec.rate = rate_from(Reader(r.raw("rate"), r.child("rate"), source), r.child("rate"));
    }
    if (r.has("marks"))
    {
        spec.mark_law = marks_from(Reader(r.raw("marks"), r.child("marks"), source), r.child("marks"));
    }
    if (r.has("initial"))
    {
        spec.initial_law
            = initial_from(Reader(r.raw("initial"), r.child("initial"), source), r.child("initial"));
    }
    if (r.has("distance"))
    {
        spec.distance = distance_from(Reader(r.raw("distance"), r.child("distance"), source),
                                      r.child("distance"));
    }
    if (r.has("allow_zero_inf_rate"))
    {
        auto const& v = r.raw("allow_zero_inf_rate");
        if (!v.is_boolean())
        {
            r.fail(r.child("allow_zero_inf_rate"), "expected true or false");
        }
        spec.allow_zero_inf_rate = v.get<bool>();
    }
    return spec;
}

Json model_to_json(ModelSpec const& spec)
{
    Json out;
    out["alpha"] = spec.alpha;
    out["rate"] = std::visit(
        Overloaded{
            [](RateFunction::Arctan const& k) { return Json{{"kind", "arctan"}, {"c", k.c}, {"d", k.d}}; },
            [](RateFunction::Constant const& k) { return Json{{"kind", "constant"}, {"lambda", k.lambda}}; },
            [](RateFunction::Table const& k) {
                return Json{{"kind", "table"},
                            {"breakpoints", numbers_json(k.breakpoints)},
                            {"values", numbers_json(k.values)},
                            {"lipschitz", k.lipschitz}};
            }},
        spec.rate.kind());
    out["marks"] = std::visit(
        Overloaded{
            [](MarkLaw::Rademacher const& k) { return Json{{"kind", "rademacher"}, {"h", k.h}}; },
            [](MarkLaw::Uniform const& k) { return Json{{"kind", "uniform"}, {"b", k.b}}; },
            [](MarkLaw::Gaussian const& k) { return Json{{"kind", "gaussian"}, {"s", k.s}}; },
            [](MarkLaw::Discrete const& k) {
                return Json{{"kind", "discrete"},
                            {"points", numbers_json(k.points)},
                            {"weights", numbers_json(k.weights)}};
            }},
        spec.mark_law.kind());
    out["initial"] = std::visit(
        Overloaded{
            [](InitialLaw::PointMass const& k) { return Json{{"kind", "point"}, {"x0", k.x0}}; },
            [](InitialLaw::Uniform const& k) { return Json{{"kind", "uniform"}, {"a", k.a}, {"b", k.b}}; },
            [](InitialLaw::Gaussian const& k) { return Json{{"kind", "gaussian"}, {"m", k.m}, {"s", k.s}}; }},
        spec.initial_law.kind());
    out["distance"] = std::visit(
        Overloaded{[](DistanceFunction::SameAsRate const&) { return Json{{"kind", "same_as_rate"}}; },
                   [](DistanceFunction::Table const& k) {
                       return Json{{"kind", "table"},
                                   {"breakpoints", numbers_json(k.breakpoints)},
                                   {"values", numbers_json(k.values)}};
                   }},
        spec.distance.kind());
    out["allow_zero_inf_rate"] = spec.allow_zero_inf_rate;
    return out;
}

//---------------------------------------------------------------------------//
ExperimentConfig resolve_config(Json const& raw, std::string const& experiment,
                                ConfigSource const& source)
{
    Reader const top(raw, "", source);
    top.allow({"experiment", "seed", "model", "sim", "output"});

    ExperimentConfig out;
    out.experiment = experiment;
    if (top.has("experiment"))
    {
        auto const named = top.text("experiment");
        if (!experiment.empty() && named != experiment)
        {
            top.fail("experiment", "config is for '" + named + "' but '" + experiment + "' was requested");
        }
        out.experiment = named;
    }
    auto const table = experiments().find(out.experiment);
    if (table == experiments().end())
    {
        top.fail("experiment", "unknown experiment '" + out.experiment + "'");
    }

    out.seed.run_label = out.experiment;
    if (top.has("seed"))
    {
        Reader const s(top.raw("seed"), "seed", source);
        s.allow({"master", "label"});
        if (s.has("master"))
        {
            auto const& v = s.raw("master");
            if (!v.is_number_unsigned())
            {
                s.fail("seed.master", "expected a nonnegative integer");
            }
            out.seed.master_seed = v.get<std::uint64_t>();
        }
        if (s.has("label"))
        {
            out.seed.run_label = s.text("label");
        }
    }

    out.model = top.has("model") ? model_from_json(top.raw("model"), source) : ModelSpec{};

    Json const empty = Json::object();
    Reader const sim(top.has("sim") ? top.raw("sim") : empty, "sim", source);
    std::vector<std::string> names;
    for (auto const& p : table->second)
    {
        names.emplace_back(p.name);
    }
    sim.allow(names);
    out.sim = Json::object();
    for (auto const& p : table->second)
    {
        out.sim[p.name] = sim.has(p.name) ? check_param(p, sim.raw(p.name), sim) : p.fallback;
    }

    out.out_dir = "out/" + out.experiment;
    if (top.has("output"))
    {
        Reader const o(top.raw("output"), "output", source);
        o.allow({"dir"});
        if (o.has("dir"))
        {
            out.out_dir = o.text("dir");
        }
    }

    out.echo = Json::object();
    out.echo["experiment"] = out.experiment;
    out.echo["seed"] = {{"master", out.seed.master_seed}, {"label", out.seed.run_label}};
    out.echo["model"] = model_to_json(out.model);
    out.echo["sim"] = out.sim;
    out.echo["output"] = {{"dir", out.out_dir}};
    return out;
}

}  // namespace chaosmf
