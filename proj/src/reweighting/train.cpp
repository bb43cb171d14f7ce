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

#include "domainshift/reweighting/train.hpp"

#include "domainshift/crossgrad/crossgrad.hpp"
#include "domainshift/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace domainshift
{
namespace
{

constexpr std::array<std::pair<Algorithm, std::string_view>, 6> kNames{{
    {Algorithm::kErm, "erm"},
    {Algorithm::kErmPooled, "erm-pooled"},
    {Algorithm::kErmUw, "erm-uw"},
    {Algorithm::kGroupDro, "group-dro"},
    {Algorithm::kCgd, "cgd"},
    {Algorithm::kCrossGrad, "crossgrad"},
}};

}  // namespace

std::string_view to_string(Algorithm a) noexcept
{
    for (const auto& [alg, name] : kNames)
    {
        if (alg == a)
        {
            return name;
        }
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name)
{
    for (const auto& [alg, n] : kNames)
    {
        if (n == name)
        {
            return alg;
        }
    }
    throw ConfigError(fmt::format("unknown algorithm '{}'", name));
}

void TrainConfig::validate() const
{
    if (!(lr >= 0.0) || epochs < 1)
    {
        throw ConfigError("training needs lr >= 0 and epochs >= 1");
    }
    if (!(eta_alpha >= 0.0) || !(p >= 0.0) || !(C >= 0.0))
    {
        throw ConfigError("eta_alpha, p and C must be >= 0");
    }
    if (sampling == Sampling::Mode::kMinibatch && batch_size == 0)
    {
        throw ConfigError("minibatch sampling needs batch_size > 0");
    }
    if (!(divergence_threshold > 0.0))
    {
        throw ConfigError("divergence threshold must be positive");
    }
    if (early_stopping.enabled && early_stopping.patience < 1)
    {
        throw ConfigError("early stopping patience must be >= 1");
    }
}

CGDConfig TrainConfig::cgd() const
{
    CGDConfig c;
    c.eta = lr;
    c.eta_alpha = eta_alpha;
    c.p = p;
    c.C = C;
    c.variant = variant;
    c.theta_gradient = theta_gradient;
    c.epochs = epochs;
    c.seed = seed;
    return c;
}

int TrainConfig::steps_per_epoch(std::size_t total, int k) const
{
    if (sampling == Sampling::Mode::kFullBatch)
    {
        return 1;
    }
    const std::size_t per_step = static_cast<std::size_t>(k) * batch_size;
    return static_cast<int>(std::max<std::size_t>(1, (total + per_step - 1) / per_step));
}

Sampling TrainConfig::sampling_for_step(std::uint64_t step) const
{
    if (sampling == Sampling::Mode::kFullBatch)
    {
        return Sampling::full_batch();
    }
    return Sampling::minibatch(batch_size, seed, step);
}

Architecture TrainConfig::architecture(int features, int classes) const
{
    return Architecture::mlp(features, hidden, classes, head);
}

namespace
{

/// Weights of the fixed-weight algorithms; empty for adaptive ones.
Eigen::VectorXd fixed_weights(Algorithm a, const std::vector<int>& n, double C)
{
    const int k = static_cast<int>(n.size());
    switch (a)
    {
        case Algorithm::kErm:
            return DomainWeights::uniform(k).alpha;
        case Algorithm::kErmUw:
            return erm_uw_weights(n, C).alpha;
        case Algorithm::kErmPooled:
        {
            Eigen::VectorXd w(k);
            double total = 0.0;
            for (int v : n)
            {
                total += v;
            }
            for (int i = 0; i < k; ++i)
            {
                w[i] = n[static_cast<std::size_t>(i)] / total;
            }
            return w;
        }
        default:
            return {};
    }
}

double worst(const std::vector<double>& v)
{
    return *std::max_element(v.begin(), v.end());
}

}  // namespace

RunResult train(const DomainDataset& data, const TrainConfig& cfg,
                const DomainDataset* test, const DomainDataset* validation)
{
    cfg.validate();
    data.validate();
    if (cfg.algorithm == Algorithm::kCrossGrad)
    {
        return crossgrad_train(data, cfg, test);
    }
    const int k = data.num_domains();
    const std::vector<int> n = data.sizes();
    const Architecture arch = cfg.architecture(data.features(), data.classes());
    ModelParams params = ModelParams::initial(arch, cfg.seed);

    RunResult result;
    result.algorithm = cfg.algorithm;
    result.seed = cfg.seed;

    const Eigen::VectorXd fixed = fixed_weights(cfg.algorithm, n, cfg.C);
    DomainWeights alpha = DomainWeights::uniform(k);
    const CGDConfig cgd = cfg.cgd();
    const int steps = cfg.steps_per_epoch(data.total(), k);

    const bool stopping = cfg.early_stopping.enabled && validation != nullptr;
    ModelParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    std::uint64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        Eigen::VectorXd weights;
        GradientSet gs;
        for (int s = 0; s < steps; ++s, ++step)
        {
            gs = domain_stats(params, data, cfg.sampling_for_step(step), cfg.exec);
            for (int i = 0; i < k; ++i)
            {
                if (!std::isfinite(gs.losses[i]) ||
                    gs.losses[i] > cfg.divergence_threshold)
                {
                    throw DivergenceError(fmt::format(
                        "{} diverged at epoch {}: domain {} loss {}",
                        to_string(cfg.algorithm), epoch, data.name(i),
                        gs.losses[i]));
                }
            }
            switch (cfg.algorithm)
            {
                case Algorithm::kGroupDro:
                {
                    const int j = group_dro_select(choice_adjust(gs.losses, n, cfg.C));
                    weights = Eigen::VectorXd::Zero(k);
                    weights[j] = 1.0;
                    break;
                }
                case Algorithm::kCgd:
                    alpha = cgd_alpha_update(alpha, gs, cgd.eta_alpha, cgd.variant,
                                             cgd.p, cgd.C, n);
                    weights = alpha.alpha;
                    break;
                default:
                    weights = fixed;
                    break;
            }
            if (cfg.algorithm == Algorithm::kCgd &&
                cfg.theta_gradient == ThetaGradient::kScaled)
            {
                Eigen::MatrixXd scaled(k, gs.grads.cols());
                for (int i = 0; i < k; ++i)
                {
                    scaled.row(i) = scale_gradient(gs.grads.row(i).transpose(),
                                                   gs.losses[i], cfg.p)
                                        .transpose();
                }
                params.theta = weighted_step(params.theta, weights, scaled, cfg.lr);
            }
            else
            {
                params.theta = weighted_step(params.theta, weights, gs.grads, cfg.lr);
            }
        }
        result.alpha_trajectory.push_back(weights);
        result.loss_trajectory.push_back(gs.losses);
        if (cfg.record_theta)
        {
            result.theta_trajectory.push_back(params.theta);
        }
        result.epochs_run = epoch + 1;

        if (stopping)
        {
            const double val = worst(evaluate(params, *validation, cfg.exec).loss);
            if (val < best_val)
            {
                best_val = val;
                best = params;
                result.best_epoch = epoch;
                since_best = 0;
            }
            else if (++since_best >= cfg.early_stopping.patience)
            {
                break;
            }
        }
    }
    result.params = stopping ? best : params;
    result.train_metrics = evaluate(result.params, data, cfg.exec);
    if (test != nullptr)
    {
        result.test_metrics = evaluate(result.params, *test, cfg.exec);
    }
    return result;
}

}  // namespace domainshift
