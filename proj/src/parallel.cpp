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

#include "chaosmf/parallel.hpp"

#include <cstdlib>
#include <string>

namespace chaosmf {

unsigned resolve_threads(int requested)
{
    if (requested > 0)
    {
        return static_cast<unsigned>(requested);
    }
    if (char const* env = std::getenv("CHAOSMF_THREADS"))
    {
        try
        {
            int const value = std::stoi(env);
            if (value > 0)
            {
                return static_cast<unsigned>(value);
            }
        }
        catch (std::exception const&)
        {
        }
    }
    return 1;
}

}  // namespace chaosmf
