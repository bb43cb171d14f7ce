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

#include "domainshift/csd/csd_train.hpp"
#include "domainshift/reweighting/train.hpp"
#include "domainshift/synth/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace domainshift
{

/// One experiment: a task, an algorithm with its settings, and the seeds.
/// Seed s drives both the data draw and the model initialization.
struct ExperimentConfig
{
    SynthTask task;
    /// A train() algorithm name or "csd".
    std::string algorithm = "cgd";
    TrainConfig train;
    CSDTrainConfig csd;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};
    std::string output = "out";
    /// Worker threads for seeds (0 = hardware concurrency).
    int threads = 1;
    double tolerance_scale = 1.0;

    bool is_csd() const noexcept { return algorithm == "csd"; }
    /// Throws ConfigError on any invalid field.
    void validate() const;
    /// Task, train and CSD settings for one seed.
    SynthTask task_for(std::uint64_t seed) const;
    TrainConfig train_for(std::uint64_t seed) const;
    CSDTrainConfig csd_for(std::uint64_t seed) const;
};

/// Parses a YAML document. Missing keys keep their defaults; unknown keys
/// and malformed values throw ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// YAML document listing every field, defaults included.
std::string dump_config(const ExperimentConfig& cfg);

/// Replaces the seed list with the single seed in `value`, if set.
/// Throws ConfigError when it is not a non-negative integer.
void apply_seed_override(ExperimentConfig& cfg, const char* value);

/// Name of the environment variable read by apply_seed_override callers.
inline constexpr const char* kSeedEnv = "DOMAINSHIFT_SEED";

}  // namespace domainshift
