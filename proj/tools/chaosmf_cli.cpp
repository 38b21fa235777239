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

#include <iostream>

#include <CLI11.hpp>

#include "chaosmf/config.hpp"
#include "chaosmf/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Mean-field limit experiments for interacting neurons with common noise"};
    app.set_version_flag("--version", chaosmf::library_version);
    app.require_subcommand(1);

    chaosmf::RunRequest request;
    int threads = 0;
    std::uint64_t seed = 0;
    std::string out;

    for (auto const& name : chaosmf::experiment_names())
    {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", request.config_path, "JSON configuration file")
            ->check(CLI::ExistingFile);
        sub->add_option("--set", request.overrides, "override a config value: KEY=VALUE (repeatable)")
            ->take_all();
        sub->add_option("--threads", threads, "worker threads (default: CHAOSMF_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "master seed");
        sub->callback([&request, name] { request.experiment = name; });
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (auto* sub : app.get_subcommands())
    {
        if (sub->count("--threads"))
        {
            request.threads = threads;
        }
        if (sub->count("--seed"))
        {
            request.seed = seed;
        }
        if (sub->count("--out"))
        {
            request.out_dir = out;
        }
    }

    auto const result = chaosmf::run(request);
    (result.exit_code == 0 ? std::cout : std::cerr) << result.message << '\n';
    return result.exit_code;
}
