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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "chaosmf/errors.hpp"
#include "chaosmf/runner.hpp"

using namespace chaosmf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(std::string const& name)
{
    auto const dir = fs::temp_directory_path() / ("chaosmf-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(fs::path const& dir, std::string const& name, std::string const& text)
{
    auto const p = dir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string validation_message(std::string const& text, std::string const& experiment)
{
    ConfigSource const src(text, "cfg.json");
    try
    {
        resolve_config(src.parse(), experiment, src);
    }
    catch (ValidationError const& e)
    {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("number formatting and tables")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1e-300) == "1e-300");
    CHECK(format_number(64) == "64");

    CsvTable t{"a: first", {"a", "b"}, {{"1", "2"}}};
    CHECK(t.str() == "# a: first\na,b\n1,2\n");

    RateFit fit;
    for (double n : {1.0, 2.0, 3.0, 4.0, 5.0})
    {
        fit.points.push_back({n, 1 / n, 0.5});
    }
    auto const rt = rate_table(fit, "N");
    CHECK(rt.header == std::vector<std::string>{"N", "estimate", "se"});
    CHECK(rt.rows.size() == 5);
    CHECK(rt.rows[1] == std::vector<std::string>{"2", "0.5", "0.5"});
}

TEST_CASE("sha256")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("strict configuration schema")
{
    auto const unknown = validation_message("{\n  \"model\": {\n    \"alpha\": 1,\n    \"alpah\": 2\n  }\n}",
                                            "picard");
    CHECK(unknown.find("cfg.json:4") != std::string::npos);
    CHECK(unknown.find("alpah") != std::string::npos);

    auto const syntax = validation_message("{\n  \"seed\": {\"master\": 1,}\n}", "picard");
    CHECK(syntax.find("cfg.json:2:") != std::string::npos);

    CHECK_FALSE(validation_message("{\"sim\": {\"N\": -4}}", "simulate-finite").empty());
    CHECK_FALSE(validation_message("{\"sim\": {\"N\": 2.5}}", "simulate-finite").empty());
    CHECK_FALSE(validation_message("{\"sim\": {\"M\": 10}}", "simulate-finite").empty());
    CHECK_FALSE(validation_message("{\"model\": {\"rate\": {\"kind\": \"cubic\"}}}", "picard").empty());
    CHECK_FALSE(validation_message("{\"experiment\": \"picard\"}", "isometry").empty());
    CHECK(validation_message("{\"experiment\": \"picard\", \"sim\": {\"R\": 10}}", "picard").empty());

    ConfigSource const src("{}", "cfg.json");
    auto const cfg = resolve_config(src.parse(), "simulate-finite", src);
    CHECK(cfg.sim["N"] == 64);
    CHECK(cfg.out_dir == "out/simulate-finite");
    CHECK(cfg.seed.run_label == "simulate-finite");
}

TEST_CASE("overrides")
{
    Json j = Json::parse(R"({"sim": {"N": 8}})");
    ConfigSource src(j.dump(), "cfg.json");
    apply_override(j, "sim.N=64", src);
    apply_override(j, "model.rate.kind=constant", src);
    CHECK(j["sim"]["N"] == 64);
    CHECK(j["model"]["rate"]["kind"] == "constant");
    CHECK(src.where("sim.N").find("--set") != std::string::npos);
    CHECK_THROWS_AS(apply_override(j, "novalue", src), ValidationError);
}

TEST_CASE("model round trip")
{
    ModelSpec spec;
    spec.alpha = 0.5;
    spec.rate = RateFunction::table({-1, 0, 1}, {1, 2, 4}, 2.0);
    spec.mark_law = MarkLaw::discrete({-1, 2}, {2.0 / 3, 1.0 / 3});
    spec.initial_law = InitialLaw::gaussian(0.1, 0.3);
    auto const j = model_to_json(spec);
    CHECK(model_to_json(model_from_json(j)) == j);
}

TEST_CASE("run writes reproducible artifacts")
{
    auto const dir = scratch("run");
    auto const cfg = write_file(dir, "c.json", R"({"sim": {"N": 8, "T": 2, "R": 2}})");
    RunRequest req;
    req.experiment = "simulate-finite";
    req.config_path = cfg.string();
    req.overrides = {"sim.N=16"};
    req.out_dir = (dir / "a").string();
    auto const a = run(req);
    REQUIRE(a.exit_code == 0);
    req.out_dir = (dir / "b").string();
    req.threads = 3;
    auto const b = run(req);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(dir / "a" / "results.csv") == slurp(dir / "b" / "results.csv"));

    auto const manifest = Json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["config"]["sim"]["N"] == 16);
    CHECK(manifest["overrides"][0] == "sim.N=16");
    CHECK(manifest["checksums"]["results.csv"] == sha256_hex(slurp(dir / "a" / "results.csv")));
    CHECK(manifest["version"] == library_version);
    auto const summary = Json::parse(slurp(dir / "a" / "summary.json"));
    CHECK(summary["experiment"] == "simulate-finite");
}

TEST_CASE("run exit codes")
{
    auto const dir = scratch("exit");
    RunRequest req;
    req.experiment = "picard";
    req.out_dir = (dir / "o").string();
    req.overrides = {"model.rate.c=1", "model.rate.d=1"};
    auto const bad = run(req);
    CHECK(bad.exit_code == 1);
    CHECK(bad.message.find("Assumption 3") != std::string::npos);

    req.overrides = {"sim.bogus=1"};
    CHECK(run(req).exit_code == 1);

    req.overrides = {};
    req.config_path = (dir / "missing.json").string();
    CHECK(run(req).exit_code == 1);

    req.config_path = write_file(dir, "broken.json", "{\n\"sim\": [\n").string();
    auto const broken = run(req);
    CHECK(broken.exit_code == 1);
    CHECK(broken.message.find("broken.json:") != std::string::npos);

    RunRequest unknown;
    unknown.experiment = "nonsense";
    unknown.out_dir = (dir / "u").string();
    CHECK(run(unknown).exit_code == 1);
}
