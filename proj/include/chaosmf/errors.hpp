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

#include <stdexcept>
#include <string>
#include <vector>

namespace chaosmf {

/// Malformed input: bad parameters, non-monotone tables, schema violations.
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A model that is well-formed but violates one of the standing assumptions
/// required by the requested computation.
class AssumptionError : public std::runtime_error
{
public:
    AssumptionError(std::string const& message, std::vector<std::string> failed)
        : std::runtime_error(message), failed_(std::move(failed))
    {
    }

    std::vector<std::string> const& failed() const noexcept { return failed_; }

private:
    std::vector<std::string> failed_;
};

}  // namespace chaosmf
