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

#include "domainshift/reweighting/reweighting.hpp"

#include "domainshift/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace domainshift
{

DomainWeights DomainWeights::uniform(int k)
{
    if (k < 1)
    {
        throw ConfigError("DomainWeights needs at least one domain");
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(k);
    const double z = w.sum();
    return DomainWeights{w / z};
}

void DomainWeights::validate() const
{
    if (alpha.size() == 0)
    {
        throw ConfigError("empty domain weights");
    }
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
    {
        if (!(alpha[i] > 0.0))
        {
            throw ConfigError(fmt::format("alpha[{}] = {} is not positive", i,
                                          alpha[i]));
        }
    }
    if (std::abs(alpha.sum() - 1.0) > 1e-9)
    {
        throw ConfigError(fmt::format("alpha sums to {}", alpha.sum()));
    }
}

void CGDConfig::validate() const
{
    if (!(eta >= 0.0) || !(eta_alpha >= 0.0) || !(p >= 0.0) || !(C >= 0.0))
    {
        throw ConfigError("CGD step sizes, p and C must be non-negative");
    }
    if (epochs < 1)
    {
        throw ConfigError("CGD needs epochs >= 1");
    }
}

namespace
{

void check_sizes(std::span<const int> n, Eigen::Index k)
{
    if (static_cast<Eigen::Index>(n.size()) != k)
    {
        throw ConfigError(fmt::format("{} domain sizes for {} domains",
                                      n.size(), k));
    }
    for (int v : n)
    {
        if (v < 1)
        {
            throw ConfigError("domain sizes must be >= 1");
        }
    }
}

}  // namespace

DomainWeights erm_uw_weights(std::span<const int> n, double C)
{
    check_sizes(n, static_cast<Eigen::Index>(n.size()));
    if (n.empty())
    {
        throw ConfigError("erm_uw_weights needs at least one domain");
    }
    Eigen::VectorXd e(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i)
    {
        e[static_cast<Eigen::Index>(i)] =
            C / std::sqrt(static_cast<double>(n[i]));
    }
    const Eigen::VectorXd w = (e.array() - e.maxCoeff()).exp().matrix();
    const double z = w.sum();
    return DomainWeights{w / z};
}

Eigen::VectorXd choice_adjust(const Eigen::Ref<const Eigen::VectorXd>& losses,
                              std::span<const int> n, double C)
{
    check_sizes(n, losses.size());
    Eigen::VectorXd out = losses;
    if (C == 0.0)
    {
        return out;
    }
    for (Eigen::Index i = 0; i < out.size(); ++i)
    {
        out[i] += C / std::sqrt(static_cast<double>(n[static_cast<std::size_t>(i)]));
    }
    return out;
}

int group_dro_select(const Eigen::Ref<const Eigen::VectorXd>& adjusted_losses)
{
    if (adjusted_losses.size() == 0)
    {
        throw ConfigError("group_dro_select on an empty vector");
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < adjusted_losses.size(); ++i)
    {
        if (adjusted_losses[i] > adjusted_losses[best])
        {
            best = i;
        }
    }
    return static_cast<int>(best);
}

DomainWeights multiplicative_update(
    const DomainWeights& alpha,
    const Eigen::Ref<const Eigen::VectorXd>& exponents)
{
    if (exponents.size() != alpha.alpha.size())
    {
        throw ConfigError("exponent / weight length mismatch");
    }
    for (Eigen::Index i = 0; i < exponents.size(); ++i)
    {
        if (!std::isfinite(exponents[i]))
        {
            throw NumericError(
                fmt::format("non-finite alpha exponent for domain {}", i), i);
        }
    }
    const double top = exponents.maxCoeff();
    if (exponents.minCoeff() == top)
    {
        // A common factor cancels in the normalization.
        return alpha;
    }
    Eigen::VectorXd w =
        alpha.alpha.array() * (exponents.array() - top).exp();
    const double z = w.sum();
    if (!(z > 0.0) || !std::isfinite(z))
    {
        throw NumericError("alpha normalizer is not positive and finite");
    }
    w /= z;
    // Keep strictly inside the simplex when a weight underflows.
    for (Eigen::Index i = 0; i < w.size(); ++i)
    {
        if (w[i] <= 0.0)
        {
            w[i] = std::numeric_limits<double>::min();
        }
    }
    return DomainWeights{w / w.sum()};
}

DomainWeights cgd_alpha_update(const DomainWeights& alpha,
                               const GradientSet& gs, double eta_alpha,
                               CgdVariant variant, double p, double C,
                               std::span<const int> n)
{
    const Eigen::Index k = gs.losses.size();
    if (alpha.alpha.size() != k || gs.grads.rows() != k)
    {
        throw ConfigError("cgd_alpha_update: domain count mismatch");
    }
    if (!gs.grads.allFinite())
    {
        throw NumericError("cgd_alpha_update: non-finite gradient");
    }
    Eigen::VectorXd e(k);
    if (variant == CgdVariant::kInnerProduct)
    {
        Eigen::VectorXd total = Eigen::VectorXd::Zero(gs.grads.cols());
        for (Eigen::Index j = 0; j < k; ++j)
        {
            total += gs.grads.row(j).transpose();
        }
        e = eta_alpha * (gs.grads * total);
    }
    else
    {
        const Eigen::VectorXd adjusted = choice_adjust(gs.losses, n, C);
        Eigen::MatrixXd scaled(k, gs.grads.cols());
        for (Eigen::Index i = 0; i < k; ++i)
        {
            scaled.row(i) =
                scale_gradient(gs.grads.row(i).transpose(), adjusted[i], p)
                    .transpose();
        }
        for (Eigen::Index i = 0; i < k; ++i)
        {
            double s = 0.0;
            for (Eigen::Index j = 0; j < k; ++j)
            {
                s += scaled.row(i).dot(scaled.row(j));
            }
            e[i] = eta_alpha * s;
        }
    }
    return multiplicative_update(alpha, e);
}

Eigen::VectorXd weighted_step(const Eigen::VectorXd& theta,
                              const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const Eigen::Ref<const Eigen::MatrixXd>& grads,
                              double eta)
{
    if (weights.size() != grads.rows() || grads.cols() != theta.size())
    {
        throw ConfigError("weighted_step: shape mismatch");
    }
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(theta.size());
    for (Eigen::Index i = 0; i < weights.size(); ++i)
    {
        direction += weights[i] * grads.row(i).transpose();
    }
    return theta - eta * direction;
}

std::pair<ModelParams, DomainWeights> cgd_step(const ModelParams& params,
                                               const DomainWeights& alpha,
                                               const DomainDataset& data,
                                               const CGDConfig& cfg,
                                               const Sampling& sampling,
                                               Exec exec)
{
    cfg.validate();
    const GradientSet gs = domain_stats(params, data, sampling, exec);
    const std::vector<int> n = data.sizes();
    DomainWeights next = cgd_alpha_update(alpha, gs, cfg.eta_alpha,
                                          cfg.variant, cfg.p, cfg.C, n);
    ModelParams out = params;
    if (cfg.theta_gradient == ThetaGradient::kRaw)
    {
        out.theta = weighted_step(params.theta, next.alpha, gs.grads, cfg.eta);
    }
    else
    {
        Eigen::MatrixXd scaled(gs.grads.rows(), gs.grads.cols());
        for (Eigen::Index i = 0; i < scaled.rows(); ++i)
        {
            scaled.row(i) = scale_gradient(gs.grads.row(i).transpose(),
                                           gs.losses[i], cfg.p)
                                .transpose();
        }
        out.theta = weighted_step(params.theta, next.alpha, scaled, cfg.eta);
    }
    return {std::move(out), std::move(next)};
}

double fosp_norm(const ModelParams& params, const DomainDataset& data,
                 Exec exec)
{
    const GradientSet gs = domain_stats(params, data, Sampling::full_batch(), exec);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(gs.grads.cols());
    for (Eigen::Index i = 0; i < gs.grads.rows(); ++i)
    {
        g += gs.grads.row(i).transpose();
    }
    g /= static_cast<double>(gs.grads.rows());
    return g.norm();
}

double macro_risk(const ModelParams& params, const DomainDataset& data,
                  Exec exec)
{
    data.validate();
    double total = 0.0;
    for (const Batch& b : data.domains())
    {
        total += mean_loss(params, b, exec);
    }
    return total / static_cast<double>(data.num_domains());
}

void ConvergenceBudget::validate() const
{
    if (!(B > 0.0) || !(L > 0.0) || !(G > 0.0) || T < 1 || !(epsilon > 0.0))
    {
        throw ConfigError("convergence budget entries must be positive");
    }
}

long long ConvergenceBudget::iterations_for(double B, double L, double G,
                                            double epsilon)
{
    const double t = 9.0 * B * L * G * G / std::pow(epsilon, 4.0);
    return static_cast<long long>(std::ceil(t));
}

StepSizes theorem_step_sizes(const ConvergenceBudget& budget)
{
    budget.validate();
    const double T = static_cast<double>(budget.T);
    const double G2 = budget.G * budget.G;
    return StepSizes{2.0 * std::sqrt(budget.B / (budget.L * G2 * T)),
                     std::sqrt(budget.B * budget.L / (G2 * G2 * G2 * T))};
}

}  // namespace domainshift
