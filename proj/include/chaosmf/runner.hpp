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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaosmf/config.hpp"
#include "chaosmf/stats.hpp"

namespace chaosmf {

inline constexpr char const* library_version = "0.1.0";

//! Shortest round-trip decimal form; negative zero prints as 0
std::string format_number(double value);

//! Comma-separated table preceded by a '#' line documenting the columns
struct CsvTable
{
    std::string comment;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
};

//! Long-format plot data: one row per (size, estimate, se)
CsvTable rate_table(RateFit const& fit, std::string const& size_name);

std::string sha256_hex(std::string_view bytes);

struct RunRequest
{
    std::string experiment;
    //! Empty: start from built-in defaults
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};

struct RunResult
{
    //! 0 success, 1 validation or assumption failure, 2 runtime failure
    int exit_code = 0;
    std::string message;
    std::filesystem::path out_dir;
};

/*!
 * Validate the configuration, run one experiment and write results.csv,
 * summary.json and manifest.json into the output directory.
 */
RunResult run(RunRequest const& request);

}  // namespace chaosmf
