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

#include "domainshift/kernels/loss_kernels.hpp"
#include "domainshift/model/dataset.hpp"
#include "domainshift/model/params.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace domainshift
{

/// Per-domain losses l_i and gradients g_i (row i of `grads`).
struct GradientSet
{
    Eigen::VectorXd losses;
    Eigen::MatrixXd grads;  // k x P

    int domains() const noexcept { return static_cast<int>(losses.size()); }
};

/// How domain_stats picks the examples of each domain.
struct Sampling
{
    enum class Mode
    {
        kFullBatch,
        kMinibatch,
    };

    Mode mode = Mode::kFullBatch;
    std::size_t batch_size = 0;
    std::uint64_t seed = 0;
    /// Step counter; minibatch draws for step t come from split(t).
    std::uint64_t step = 0;

    static Sampling full_batch() { return {}; }
    static Sampling minibatch(std::size_t size, std::uint64_t seed,
                              std::uint64_t step = 0)
    {
        return {Mode::kMinibatch, size, seed, step};
    }
};

/// Rows of a domain with `n` examples used for one minibatch draw. Draws for
/// (seed, step, domain) are independent of every other draw.
std::vector<std::size_t> minibatch_rows(const Sampling& sampling, int domain,
                                        std::size_t n);

/// Gradient-norm floor below which scale_gradient returns zero.
inline constexpr double kGradNormTau = 1e-12;

/// Mean cross-entropy over `batch` and its exact gradient.
/// Throws ConfigError on shape mismatch, NumericError on non-finite values.
LossGrad loss_and_grad(const ModelParams& params, const Batch& batch,
                       Exec exec = Exec::kParallel);
LossGrad loss_and_grad(const ModelParams& params,
                       std::span<const Example> batch,
                       Exec exec = Exec::kParallel);

/// Mean cross-entropy only.
double mean_loss(const ModelParams& params, const Batch& batch,
                 Exec exec = Exec::kParallel);

/// Per-domain loss and gradient.
GradientSet domain_stats(const ModelParams& params, const DomainDataset& data,
                         const Sampling& sampling = Sampling::full_batch(),
                         Exec exec = Exec::kParallel);

/// (g / |g|) * loss^p, or zero when |g| < kGradNormTau.
Eigen::VectorXd scale_gradient(const Eigen::Ref<const Eigen::VectorXd>& g,
                               double loss, double p);

/// Central differences, one coordinate at a time.
Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss_fn,
    const Eigen::VectorXd& theta, double h);

Eigen::VectorXd fd_gradient(
    const std::function<double(const ModelParams&)>& loss_fn,
    const ModelParams& params, double h);

/// Per-domain mean loss and accuracy.
struct DomainMetrics
{
    std::vector<double> loss;
    std::vector<double> accuracy;
};

DomainMetrics evaluate(const ModelParams& params, const DomainDataset& data,
                       Exec exec = Exec::kParallel);

/// Throws ConfigError unless `params` fits a dataset with this shape.
void check_shapes(const ModelParams& params, int features, int classes);

}  // namespace domainshift
