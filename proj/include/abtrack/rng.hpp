// SPDX-License-Identifier: Apache-2.0
//
// abtrack: auxiliary-beam-pair angle tracking for mobile mmWave arrays
// Copyright (C) 2026 abtrack contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "abtrack/numerics.hpp"

#include <cstdint>
#include <string_view>

namespace abt {

std::uint64_t fnv1a64(std::string_view s);

// Counter-based generator. The stream key mixes the campaign seed with the
// stream name, so consuming draws from one stream never shifts the values
// produced by another. Copying a stream copies its position.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::string_view name);

    std::uint64_t bits();
    double uniform();  // [0, 1)
    double normal();   // standard normal (Box-Muller, second value cached)
    cxd cnormal();     // circularly symmetric complex normal, unit variance

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace abt
