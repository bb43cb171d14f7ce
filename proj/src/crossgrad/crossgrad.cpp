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

#include "domainshift/crossgrad/crossgrad.hpp"

#include "domainshift/error.hpp"
#include "domainshift/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace domainshift
{

void CrossGradConfig::validate() const
{
    if (!(eps_label >= 0.0) || !(eps_domain >= 0.0))
    {
        throw ConfigError("CrossGrad eps must be >= 0");
    }
    if (!(alpha_label >= 0.0 && alpha_label <= 1.0) ||
        !(alpha_domain >= 0.0 && alpha_domain <= 1.0))
    {
        throw ConfigError("CrossGrad alpha must be in [0, 1]");
    }
    if (!(lr >= 0.0) || epochs < 1)
    {
        throw ConfigError("CrossGrad needs lr >= 0 and epochs >= 1");
    }
}

RowMatrix input_grad(const ModelParams& params, const RowMatrix& x,
                     std::span<const int> targets, Exec exec)
{
    if (x.rows() == 0 || x.rows() != static_cast<Eigen::Index>(targets.size()))
    {
        throw ConfigError("input_grad: rows and targets differ or are empty");
    }
    if (x.cols() != params.arch.inputs())
    {
        throw ConfigError("input_grad: feature count mismatch");
    }
    RowMatrix g = kernels::input_grad_rows(params, x, targets, exec);
    g /= static_cast<double>(x.rows());
    return g;
}

RowMatrix perturb(const RowMatrix& x, const RowMatrix& grad, double eps)
{
    if (x.rows() != grad.rows() || x.cols() != grad.cols())
    {
        throw ConfigError("perturb: shape mismatch");
    }
    return x + eps * grad;
}

namespace
{

/// Per-example (or batch-mean) input gradient used as a perturbation.
RowMatrix direction(const ModelParams& params, const RowMatrix& x,
                    std::span<const int> targets, bool per_example, Exec exec)
{
    if (per_example)
    {
        return kernels::input_grad_rows(params, x, targets, exec);
    }
    return input_grad(params, x, targets, exec);
}

/// g_clean + alpha (g_pert - g_clean); exactly g_clean when the perturbed
/// batch equals the clean one.
Eigen::VectorXd mixed_grad(const ModelParams& params, const Batch& clean,
                           const RowMatrix& perturbed, double alpha, Exec exec)
{
    Eigen::VectorXd g = loss_and_grad(params, clean, exec).grad;
    if (alpha == 0.0)
    {
        return g;
    }
    Batch shifted{perturbed, clean.y};
    const Eigen::VectorXd gp = loss_and_grad(params, shifted, exec).grad;
    return g + alpha * (gp - g);
}

}  // namespace

DualParams crossgrad_step(const DualParams& dual, std::span<const Batch> batches,
                          const CrossGradConfig& cfg, Exec exec)
{
    cfg.validate();
    const auto k = static_cast<Eigen::Index>(batches.size());
    if (k == 0)
    {
        throw ConfigError("crossgrad_step needs at least one domain batch");
    }
    if (dual.theta_domain.arch.classes != static_cast<int>(k))
    {
        throw ConfigError(fmt::format("domain net has {} classes for {} domains",
                                      dual.theta_domain.arch.classes, k));
    }
    Eigen::MatrixXd label_grads(k, dual.theta_label.theta.size());
    Eigen::MatrixXd domain_grads(k, dual.theta_domain.theta.size());
    for (Eigen::Index i = 0; i < k; ++i)
    {
        const Batch& b = batches[static_cast<std::size_t>(i)];
        Batch by_domain{b.x, std::vector<int>(b.size(), static_cast<int>(i))};

        // Both perturbations use the networks at the start of the step.
        const RowMatrix x_d = perturb(
            b.x,
            direction(dual.theta_domain, b.x, by_domain.y, cfg.per_example, exec),
            cfg.eps_label);
        const RowMatrix x_l = perturb(
            b.x, direction(dual.theta_label, b.x, b.y, cfg.per_example, exec),
            cfg.eps_domain);

        label_grads.row(i) =
            mixed_grad(dual.theta_label, b, x_d, cfg.alpha_label, exec).transpose();
        domain_grads.row(i) =
            mixed_grad(dual.theta_domain, by_domain, x_l, cfg.alpha_domain, exec)
                .transpose();
    }
    const DomainWeights uniform = DomainWeights::uniform(static_cast<int>(k));
    DualParams out = dual;
    out.theta_label.theta = weighted_step(dual.theta_label.theta, uniform.alpha,
                                          label_grads, cfg.lr);
    out.theta_domain.theta = weighted_step(dual.theta_domain.theta,
                                           uniform.alpha, domain_grads, cfg.lr);
    return out;
}

DualParams initial_dual(const Architecture& label_arch, int domains,
                        const CrossGradConfig& cfg)
{
    const Architecture domain_arch = Architecture::mlp(
        label_arch.inputs(), cfg.domain_hidden, domains, Head::kSoftmax);
    return DualParams{
        ModelParams::initial(label_arch, mix64(cfg.seed ^ 0x6C6162656CULL)),
        ModelParams::initial(domain_arch, mix64(cfg.seed ^ 0x646F6D61696EULL))};
}

RunResult crossgrad_train(const DomainDataset& data, const TrainConfig& cfg,
                          const DomainDataset* test)
{
    cfg.validate();
    data.validate();
    CrossGradConfig cg = cfg.crossgrad;
    cg.lr = cfg.lr;
    cg.epochs = cfg.epochs;
    cg.seed = cfg.seed;
    cg.validate();

    const Architecture arch = cfg.architecture(data.features(), data.classes());
    DualParams dual = initial_dual(arch, data.num_domains(), cg);
    // The label net starts where every other algorithm starts.
    dual.theta_label = ModelParams::initial(arch, cfg.seed);

    RunResult result;
    result.algorithm = Algorithm::kCrossGrad;
    result.seed = cfg.seed;
    const int k = data.num_domains();
    const int steps = cfg.steps_per_epoch(data.total(), k);
    const Eigen::VectorXd uniform = DomainWeights::uniform(k).alpha;
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        Eigen::VectorXd losses(k);
        for (int s = 0; s < steps; ++s, ++step)
        {
            const Sampling sampling = cfg.sampling_for_step(step);
            std::vector<Batch> batches;
            batches.reserve(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i)
            {
                const Batch& full = data.domain(i);
                if (sampling.mode == Sampling::Mode::kFullBatch ||
                    sampling.batch_size >= full.size())
                {
                    batches.push_back(full);
                }
                else
                {
                    batches.push_back(
                        full.subset(minibatch_rows(sampling, i, full.size())));
                }
                losses[i] = mean_loss(dual.theta_label, batches.back(), cfg.exec);
                if (!std::isfinite(losses[i]) ||
                    losses[i] > cfg.divergence_threshold)
                {
                    throw DivergenceError(fmt::format(
                        "crossgrad diverged at epoch {}: domain {} loss {}",
                        epoch, data.name(i), losses[i]));
                }
            }
            dual = crossgrad_step(dual, batches, cg, cfg.exec);
        }
        result.alpha_trajectory.push_back(uniform);
        result.loss_trajectory.push_back(losses);
        if (cfg.record_theta)
        {
            result.theta_trajectory.push_back(dual.theta_label.theta);
        }
        result.epochs_run = epoch + 1;
    }
    result.params = dual.theta_label;
    result.domain_params = dual.theta_domain;
    result.train_metrics = evaluate(result.params, data, cfg.exec);
    if (test != nullptr)
    {
        result.test_metrics = evaluate(result.params, *test, cfg.exec);
    }
    return result;
}

RunResult crossgrad_train(const DomainDataset& data, const CrossGradConfig& cfg,
                          const DomainDataset* test)
{
    TrainConfig tc;
    tc.algorithm = Algorithm::kCrossGrad;
    tc.lr = cfg.lr;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.seed;
    tc.crossgrad = cfg;
    tc.head = data.classes() == 2 ? Head::kReferenceClass : Head::kSoftmax;
    return crossgrad_train(data, tc, test);
}

}  // namespace domainshift
