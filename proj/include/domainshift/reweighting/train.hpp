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

#include "domainshift/crossgrad/config.hpp"
#include "domainshift/reweighting/reweighting.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace domainshift
{

enum class Algorithm
{
    /// Uniform weight 1/k per domain (descent on the macro risk).
    kErm,
    /// Weight n_i / N per domain (pooled examples).
    kErmPooled,
    /// Fixed weights proportional to exp(C / sqrt(n_i)).
    kErmUw,
    /// Step on the domain with the highest adjusted loss.
    kGroupDro,
    kCgd,
    kCrossGrad,
};

std::string_view to_string(Algorithm a) noexcept;
/// Accepts erm, erm-pooled, erm-uw, group-dro, cgd, crossgrad.
Algorithm parse_algorithm(std::string_view name);

struct EarlyStopping
{
    bool enabled = false;
    int patience = 20;
};

struct TrainConfig
{
    Algorithm algorithm = Algorithm::kCgd;
    double lr = 0.1;
    int epochs = 400;
    std::uint64_t seed = 0;

    double eta_alpha = 0.01;
    double p = 0.5;
    double C = 0.0;
    CgdVariant variant = CgdVariant::kScaledCosine;
    ThetaGradient theta_gradient = ThetaGradient::kRaw;

    Sampling::Mode sampling = Sampling::Mode::kFullBatch;
    std::size_t batch_size = 0;

    /// Label network: hidden tanh layers (empty = linear) and head.
    std::vector<int> hidden;
    Head head = Head::kReferenceClass;

    CrossGradConfig crossgrad;
    EarlyStopping early_stopping;
    double divergence_threshold = 1e6;
    Exec exec = Exec::kParallel;
    /// Keep theta after every epoch (used by equivalence checks).
    bool record_theta = false;

    void validate() const;
    CGDConfig cgd() const;
    /// Parameter steps per epoch for a dataset with `total` examples in `k`
    /// domains: 1 in full-batch mode, ceil(total / (k * batch_size)) otherwise.
    int steps_per_epoch(std::size_t total, int k) const;
    Sampling sampling_for_step(std::uint64_t step) const;
    Architecture architecture(int features, int classes) const;
};

struct RunResult
{
    Algorithm algorithm = Algorithm::kErm;
    std::uint64_t seed = 0;
    ModelParams params;
    /// CrossGrad only.
    std::optional<ModelParams> domain_params;
    /// Weights used for the last step of each epoch.
    std::vector<Eigen::VectorXd> alpha_trajectory;
    /// Per-domain training losses at the start of the last step of each epoch.
    std::vector<Eigen::VectorXd> loss_trajectory;
    /// Parameters after each epoch when record_theta is set.
    std::vector<Eigen::VectorXd> theta_trajectory;
    DomainMetrics train_metrics;
    std::optional<DomainMetrics> test_metrics;
    int epochs_run = 0;
    int best_epoch = -1;
};

/// Trains cfg.algorithm on `train`. Test metrics are filled when `test` is
/// given; `validation` drives early stopping when that is enabled.
/// Throws DivergenceError when a domain loss exceeds the threshold.
RunResult train(const DomainDataset& train, const TrainConfig& cfg,
                const DomainDataset* test = nullptr,
                const DomainDataset* validation = nullptr);

}  // namespace domainshift
