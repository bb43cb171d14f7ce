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

#include "domainshift/model/model_core.hpp"

#include "domainshift/error.hpp"
#include "domainshift/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace domainshift
{
namespace
{

void check_finite_params(const ModelParams& params)
{
    for (Eigen::Index i = 0; i < params.theta.size(); ++i)
    {
        if (!std::isfinite(params.theta[i]))
        {
            throw NumericError(
                fmt::format("non-finite parameter at index {}", i), i);
        }
    }
}

void check_batch(const ModelParams& params, const Batch& batch)
{
    if (batch.empty())
    {
        throw ConfigError("loss_and_grad: empty batch");
    }
    if (batch.x.cols() != params.arch.inputs() ||
        batch.x.rows() != static_cast<Eigen::Index>(batch.y.size()))
    {
        throw ConfigError(fmt::format(
            "batch is {}x{} with {} labels; model expects {} inputs",
            batch.x.rows(), batch.x.cols(), batch.y.size(),
            params.arch.inputs()));
    }
    for (int y : batch.y)
    {
        if (y < 0 || y >= params.arch.classes)
        {
            throw ConfigError(fmt::format("label {} outside [0, {})", y,
                                          params.arch.classes));
        }
    }
}

}  // namespace

void check_shapes(const ModelParams& params, int features, int classes)
{
    if (params.arch.inputs() != features || params.arch.classes != classes)
    {
        throw ConfigError(fmt::format(
            "model is {} inputs / {} classes, data is {} / {}",
            params.arch.inputs(), params.arch.classes, features, classes));
    }
    if (params.size() != params.arch.param_count())
    {
        throw ConfigError(fmt::format("parameter vector has {} entries, "
                                      "architecture needs {}",
                                      params.size(), params.arch.param_count()));
    }
}

LossGrad loss_and_grad(const ModelParams& params, const Batch& batch, Exec exec)
{
    check_shapes(params, params.arch.inputs(), params.arch.classes);
    check_batch(params, batch);
    check_finite_params(params);
    LossGrad out = kernels::sum_loss_grad(params, batch.x, batch.y, exec);
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.loss *= inv;
    out.grad *= inv;
    if (!std::isfinite(out.loss))
    {
        throw NumericError("non-finite loss");
    }
    for (Eigen::Index i = 0; i < out.grad.size(); ++i)
    {
        if (!std::isfinite(out.grad[i]))
        {
            throw NumericError(
                fmt::format("non-finite gradient at parameter {}", i), i);
        }
    }
    return out;
}

LossGrad loss_and_grad(const ModelParams& params,
                       std::span<const Example> batch, Exec exec)
{
    Batch b;
    b.x.resize(static_cast<Eigen::Index>(batch.size()), params.arch.inputs());
    for (std::size_t i = 0; i < batch.size(); ++i)
    {
        if (batch[i].x.size() != params.arch.inputs())
        {
            throw ConfigError(fmt::format("example {} has {} features, "
                                          "model expects {}",
                                          i, batch[i].x.size(),
                                          params.arch.inputs()));
        }
        b.x.row(static_cast<Eigen::Index>(i)) = batch[i].x.transpose();
        b.y.push_back(batch[i].y);
    }
    return loss_and_grad(params, b, exec);
}

double mean_loss(const ModelParams& params, const Batch& batch, Exec exec)
{
    check_batch(params, batch);
    return kernels::sum_loss(params, batch.x, batch.y, exec) /
           static_cast<double>(batch.size());
}

std::vector<std::size_t> minibatch_rows(const Sampling& sampling, int domain,
                                        std::size_t n)
{
    if (sampling.batch_size == 0)
    {
        throw ConfigError("minibatch size must be positive");
    }
    Rng rng = Rng(sampling.seed)
                  .split(sampling.step)
                  .split(static_cast<std::uint64_t>(domain));
    return rng.sample_without_replacement(n, std::min(n, sampling.batch_size));
}

GradientSet domain_stats(const ModelParams& params, const DomainDataset& data,
                         const Sampling& sampling, Exec exec)
{
    data.validate();
    check_shapes(params, data.features(), data.classes());
    const int k = data.num_domains();
    GradientSet gs{Eigen::VectorXd(k),
                   Eigen::MatrixXd(k, params.theta.size())};
    for (int i = 0; i < k; ++i)
    {
        const Batch& full = data.domain(i);
        LossGrad lg;
        if (sampling.mode == Sampling::Mode::kFullBatch ||
            sampling.batch_size >= full.size())
        {
            lg = loss_and_grad(params, full, exec);
        }
        else
        {
            const auto rows = minibatch_rows(sampling, i, full.size());
            lg = loss_and_grad(params, full.subset(rows), exec);
        }
        gs.losses[i] = lg.loss;
        gs.grads.row(i) = lg.grad.transpose();
    }
    return gs;
}

Eigen::VectorXd scale_gradient(const Eigen::Ref<const Eigen::VectorXd>& g,
                               double loss, double p)
{
    if (p < 0.0 || loss < 0.0)
    {
        throw ConfigError("scale_gradient needs p >= 0 and loss >= 0");
    }
    const double norm = g.norm();
    if (norm < kGradNormTau)
    {
        return Eigen::VectorXd::Zero(g.size());
    }
    // 0^0 would be 1; a zero loss means nothing left to weigh.
    const double scale = loss == 0.0 ? 0.0 : std::pow(loss, p);
    return g * (scale / norm);
}

Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& loss_fn,
    const Eigen::VectorXd& theta, double h)
{
    if (!(h > 0.0))
    {
        throw ConfigError("fd_gradient needs h > 0");
    }
    Eigen::VectorXd probe = theta;
    Eigen::VectorXd grad(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
    {
        probe[i] = theta[i] + h;
        const double up = loss_fn(probe);
        probe[i] = theta[i] - h;
        const double down = loss_fn(probe);
        probe[i] = theta[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

Eigen::VectorXd fd_gradient(
    const std::function<double(const ModelParams&)>& loss_fn,
    const ModelParams& params, double h)
{
    ModelParams probe = params;
    return fd_gradient(
        [&](const Eigen::VectorXd& theta) {
            probe.theta = theta;
            return loss_fn(probe);
        },
        params.theta, h);
}

DomainMetrics evaluate(const ModelParams& params, const DomainDataset& data,
                       Exec exec)
{
    data.validate();
    check_shapes(params, data.features(), data.classes());
    DomainMetrics out;
    for (const Batch& b : data.domains())
    {
        const double n = static_cast<double>(b.size());
        out.loss.push_back(kernels::sum_loss(params, b.x, b.y, exec) / n);
        out.accuracy.push_back(
            static_cast<double>(kernels::count_correct(params, b.x, b.y, exec)) /
            n);
    }
    return out;
}

}  // namespace domainshift
