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

#include "domainshift/model/model_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace domainshift
{

struct WorstMacro
{
    double worst = 0.0;
    double macro = 0.0;
};

/// worst = max, macro = unweighted mean. Throws ConfigError when empty.
WorstMacro worst_and_macro(std::span<const double> per_domain_losses);

/// Minimum over domains. Throws ConfigError when empty.
double worst_accuracy(std::span<const double> per_domain_accuracy);

/// Each vector divided by its L-infinity norm, then the sample variance
/// (ddof = 1) across seeds summed over coordinates. Needs >= 2 solutions of
/// equal length; a zero solution throws DegenerateInputError.
double solution_variance(std::span<const Eigen::VectorXd> params_per_seed);

/// Sample mean and standard deviation (ddof = 1; std is 0 for one value).
struct MeanStd
{
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

/// Outcome of one seed.
struct SeedRun
{
    std::uint64_t seed = 0;
    DomainMetrics train;
    DomainMetrics test;
    /// Final parameters (solution_variance input).
    Eigen::VectorXd theta;
};

struct MetricsReport
{
    std::string task;
    std::string algorithm;
    std::vector<SeedRun> runs;

    /// Per-domain test loss and accuracy averaged over seeds.
    std::vector<double> test_loss;
    std::vector<double> test_accuracy;
    /// Across-seed statistics of the per-seed worst / macro values.
    MeanStd worst_domain_loss;
    MeanStd macro_loss;
    MeanStd worst_accuracy;
    MeanStd average_accuracy;
    MeanStd train_macro_loss;
    /// NaN with fewer than two seeds.
    double solution_variance = 0.0;
};

/// Aggregates per-seed runs (all with the same domain count).
MetricsReport build_report(std::string task, std::string algorithm,
                           std::vector<SeedRun> runs);

/// One long-format CSV record.
struct MetricRow
{
    std::string run_id;
    std::string seed;
    std::string task;
    std::string algorithm;
    std::string domain;
    std::string split;
    std::string metric;
    double value = 0.0;
};

/// Per-seed rows followed by aggregate rows (seed "all").
std::vector<MetricRow> report_rows(const MetricsReport& report);

}  // namespace domainshift
