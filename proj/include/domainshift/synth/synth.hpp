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

#include "domainshift/model/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace domainshift
{

enum class TaskKind
{
    kDgExample,
    kNoiseSimple,
    kRotationSimple,
    kSpuriousSimple,
};

std::string_view to_string(TaskKind kind) noexcept;
/// Accepts dg-example, noise-simple, rotation-simple, spurious-simple.
TaskKind parse_task(std::string_view name);

/// x = y e_c + y E_s beta_d + noise, y in {-1, +1}; class index (y + 1) / 2.
struct DgSpec
{
    Eigen::VectorXd e_c = Eigen::Vector2d(1.0, 0.0);
    Eigen::MatrixXd E_s = Eigen::Vector2d(0.0, 1.0);
    /// D x k coefficients; row d scales the specific directions of domain d.
    Eigen::MatrixXd beta;
    /// Per-domain noise level. The covariance is sigma_d I unless
    /// noise_is_std, in which case it is sigma_d^2 I.
    std::vector<double> sigma;
    std::vector<int> n;
    bool noise_is_std = false;

    void validate() const;
};

DomainDataset gen_dg_example(const DgSpec& spec, std::uint64_t seed);

struct SynthTask
{
    TaskKind kind = TaskKind::kNoiseSimple;
    std::uint64_t seed = 0;
    /// Train sizes per domain; empty picks the task default.
    std::vector<int> sizes;
    int test_size = 1000;

    /// Noise-Simple: exact fraction of domain-0 train labels flipped.
    double flip_rate = 0.2;
    /// Also flip labels in the domain-0 test split.
    bool noisy_test = false;

    /// Spurious-Simple: exact fraction of domain-0 examples whose (x1, x2)
    /// are negated, leaving them 60% predictive.
    double corruption_rate = 0.4;
    /// Spurious-Simple: exact fraction of domain-1 examples with x3 = y.
    double spurious_agreement = 0.6;
    /// Also corrupt the domain-0 test split.
    bool corrupt_test = false;

    /// dg-example: coefficients and noise of the training domains, then the
    /// held-out domain. The test split draws every domain.
    std::vector<double> beta = {-1.0, 2.0, -4.0};
    std::vector<double> sigma = {0.2, 0.5, 0.4};
    int dg_train_domains = 2;
    bool noise_is_std = false;

    void validate() const;
    std::vector<int> train_sizes() const;
};

struct TaskData
{
    DomainDataset train;
    DomainDataset test;
};

TaskData gen_noise_simple(const SynthTask& task);
TaskData gen_rotation_simple(const SynthTask& task);
TaskData gen_spurious_simple(const SynthTask& task);
TaskData gen_dg_task(const SynthTask& task);

/// Dispatch on task.kind.
TaskData make_task(const SynthTask& task);

/// Label coefficients of the three Rotation-Simple domains, as printed.
inline constexpr double kRotationWeights[3][2] = {
    {1.0, 0.0}, {0.87, 0.5}, {0.5, 0.87}};

/// Header x1..xm,y,d then one row per example.
void write_dataset_csv(std::ostream& out, const DomainDataset& data);

}  // namespace domainshift
