/*
 * Copyright 2026 The domainshift Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace domainshift
{

/// SplitMix64 generator with stream splitting.
///
/// Sequence: state += 0x9E3779B97F4A7C15, then the standard SplitMix64
/// finalizer. `split(tag)` seeds a child from the finalized mix of the
/// parent seed and the tag, so child streams do not depend on how many
/// numbers the parent has drawn. Uniform doubles use the top 53 bits.
/// Normals use the Box-Muller transform and cache the second variate.
/// The whole scheme is fixed so that runs are reproducible across
/// platforms and standard libraries (std distributions are not).
class Rng
{
public:
    explicit Rng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1).
    double uniform() noexcept;

    /// Standard normal via Box-Muller.
    double normal() noexcept;

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) noexcept;

    /// Independent child stream identified by `tag`.
    Rng split(std::uint64_t tag) const noexcept;

    /// `count` distinct indices from [0, n), partial Fisher-Yates order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                        std::size_t count);

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// SplitMix64 finalizer; exposed for seed derivation.
std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace domainshift
