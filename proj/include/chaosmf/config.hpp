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
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaosmf/model.hpp"
#include "chaosmf/random.hpp"

namespace chaosmf {

using Json = nlohmann::ordered_json;

//! Raw configuration text plus enough context to anchor error messages
class ConfigSource
{
public:
    ConfigSource() = default;
    ConfigSource(std::string text, std::string name);

    //! Parse the text; throws ValidationError with line and column on syntax errors
    Json parse() const;

    //! "file:line: " for a dotted path, or a note that the value came from --set
    std::string where(std::string const& dotted) const;

    void mark_overridden(std::string const& dotted) { overridden_.insert(dotted); }

    std::string const& name() const noexcept { return name_; }

private:
    std::string text_;
    std::string name_ = "<defaults>";
    std::set<std::string> overridden_;
};

//! Apply "a.b.c=value"; the value is read as JSON when it parses, else as a string
void apply_override(Json& config, std::string const& assignment, ConfigSource& source);

//! Names accepted as the experiment field / CLI subcommand
std::vector<std::string> const& experiment_names();

//! Whether the experiment integrates the limit system (and so needs its assumptions)
bool experiment_needs_limit(std::string const& experiment);

struct ExperimentConfig
{
    std::string experiment;
    ModelSpec model;
    SeedSpec seed;
    //! Experiment parameters with defaults filled in
    Json sim;
    std::string out_dir;
    //! Fully resolved configuration for the manifest
    Json echo;
};

/*!
 * Validate against the strict schema. Unknown keys, wrong types and bad
 * parameter values raise ValidationError anchored at the offending line.
 */
ExperimentConfig resolve_config(Json const& raw, std::string const& experiment,
                                ConfigSource const& source);

ModelSpec model_from_json(Json const& model, ConfigSource const& source = {},
                          std::string const& path = "model");
Json model_to_json(ModelSpec const& spec);

}  // namespace chaosmf
