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

#include "domainshift/csd/csd_train.hpp"

#include "domainshift/error.hpp"
#include "domainshift/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace domainshift
{

void CSDTrainConfig::validate() const
{
    if (k < 0 || !(lambda >= 0.0) || !(kappa >= 0.0))
    {
        throw ConfigError("CSD needs k >= 0, lambda >= 0, kappa >= 0");
    }
    if (epochs < 1 || !(lr >= 0.0) || !(init_scale >= 0.0))
    {
        throw ConfigError("CSD needs epochs >= 1, lr >= 0, init_scale >= 0");
    }
}

CsdParams::CsdParams(Architecture arch, int k, int domains)
    : arch_(std::move(arch)), k_(k), domains_(domains)
{
    if (k < 0 || domains < 1)
    {
        throw ConfigError("CSD parameters need k >= 0 and domains >= 1");
    }
    theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gamma_offset()) +
                                   static_cast<Eigen::Index>(domains) * k);
}

std::size_t CsdParams::ws_offset(int j) const
{
    const auto rows = static_cast<std::size_t>(arch_.logit_rows());
    const auto feats = static_cast<std::size_t>(arch_.feature_dim());
    return arch_.param_count() + static_cast<std::size_t>(j) * rows * feats;
}

std::size_t CsdParams::bs_offset(int j) const
{
    const auto rows = static_cast<std::size_t>(arch_.logit_rows());
    return ws_offset(k_) + static_cast<std::size_t>(j) * rows;
}

std::size_t CsdParams::gamma_offset() const { return bs_offset(k_); }

CsdParams CsdParams::initial(const Architecture& arch, int k, int domains,
                             std::uint64_t seed, double init_scale)
{
    CsdParams p(arch, k, domains);
    const ModelParams base = ModelParams::initial(arch, seed);
    p.theta_.head(base.theta.size()) = base.theta;
    Rng rng = Rng(seed).split(0x637364);
    for (auto i = static_cast<Eigen::Index>(arch.param_count());
         i < p.theta_.size(); ++i)
    {
        p.theta_[i] = init_scale * rng.normal();
    }
    return p;
}

ModelParams CsdParams::common() const
{
    return ModelParams{arch_, theta_.head(static_cast<Eigen::Index>(arch_.param_count()))};
}

Eigen::Map<const Eigen::MatrixXd> CsdParams::w_c() const
{
    return {theta_.data() + arch_.head_offset(), arch_.logit_rows(),
            arch_.feature_dim()};
}

Eigen::Map<const Eigen::VectorXd> CsdParams::b_c() const
{
    return {theta_.data() + arch_.head_offset() +
                static_cast<std::size_t>(arch_.logit_rows() * arch_.feature_dim()),
            arch_.logit_rows()};
}

Eigen::Map<const Eigen::MatrixXd> CsdParams::W_s(int j) const
{
    return {theta_.data() + ws_offset(j), arch_.logit_rows(), arch_.feature_dim()};
}

Eigen::Map<const Eigen::VectorXd> CsdParams::b_s(int j) const
{
    return {theta_.data() + bs_offset(j), arch_.logit_rows()};
}

Eigen::Map<const Eigen::MatrixXd> CsdParams::gamma() const
{
    return {theta_.data() + gamma_offset(), domains_, k_};
}

std::vector<Eigen::MatrixXd> CsdParams::blocks() const
{
    std::vector<Eigen::MatrixXd> out;
    for (int r = 0; r < arch_.logit_rows(); ++r)
    {
        Eigen::MatrixXd a(arch_.feature_dim(), k_ + 1);
        a.col(0) = w_c().row(r).transpose();
        for (int j = 0; j < k_; ++j)
        {
            a.col(j + 1) = W_s(j).row(r).transpose();
        }
        out.push_back(std::move(a));
    }
    return out;
}

Decomposition CsdParams::row_decomposition(int r) const
{
    Decomposition d;
    d.k = k_;
    d.w_c = w_c().row(r).transpose();
    d.W_s.resize(arch_.feature_dim(), k_);
    for (int j = 0; j < k_; ++j)
    {
        d.W_s.col(j) = W_s(j).row(r).transpose();
    }
    d.Gamma = gamma();
    return d;
}

double csd_objective(const CsdParams& params, const DomainDataset& data,
                     const CSDTrainConfig& cfg, Eigen::VectorXd* grad)
{
    const Architecture& arch = params.arch();
    check_shapes(params.common(), data.features(), data.classes());
    if (params.domains() != data.num_domains())
    {
        throw ConfigError(fmt::format("CSD model has {} domains, data has {}",
                                      params.domains(), data.num_domains()));
    }
    const int k = params.k();
    const int rows = arch.logit_rows();
    const int feats = arch.feature_dim();
    const double* theta = params.theta().data();
    if (grad != nullptr)
    {
        *grad = Eigen::VectorXd::Zero(params.theta().size());
    }
    double* g = grad != nullptr ? grad->data() : nullptr;

    const auto wc = params.w_c();
    const auto bc = params.b_c();
    const auto gamma = params.gamma();

    FeatureCache cache;
    Eigen::VectorXd rows_c, rows_d, logits, probs, d_c, d_d;
    double total = 0.0;
    std::size_t count = 0;
    for (int d = 0; d < data.num_domains(); ++d)
    {
        // Domain classifier w_d = w_c + sum_j gamma_dj W_s^j.
        Eigen::MatrixXd wd = wc;
        Eigen::VectorXd bd = bc;
        for (int j = 0; j < k; ++j)
        {
            wd += gamma(d, j) * params.W_s(j);
            bd += gamma(d, j) * params.b_s(j);
        }
        const Batch& b = data.domain(d);
        for (std::size_t i = 0; i < b.size(); ++i, ++count)
        {
            const int y = b.y[i];
            feature_forward(arch.net, theta, b.x.row(static_cast<Eigen::Index>(i)).transpose(),
                            cache);
            const Eigen::VectorXd& h = cache.output();
            rows_c = wc * h + bc;
            rows_d = wd * h + bd;
            expand_logits(arch.head, rows_d, logits);
            total += softmax_cross_entropy(logits, y, probs);
            if (g != nullptr)
            {
                head_row_gradient(arch.head, probs, y, d_d);
            }
            if (cfg.lambda != 0.0)
            {
                expand_logits(arch.head, rows_c, logits);
                total += cfg.lambda * softmax_cross_entropy(logits, y, probs);
                if (g != nullptr)
                {
                    head_row_gradient(arch.head, probs, y, d_c);
                    d_c *= cfg.lambda;
                }
            }
            else if (g != nullptr)
            {
                d_c = Eigen::VectorXd::Zero(rows);
            }
            if (g == nullptr)
            {
                continue;
            }
            const Eigen::VectorXd d_sum = d_d + d_c;
            Eigen::Map<Eigen::MatrixXd>(g + arch.head_offset(), rows, feats)
                .noalias() += d_sum * h.transpose();
            Eigen::Map<Eigen::VectorXd>(g + arch.head_offset() + rows * feats, rows) +=
                d_sum;
            for (int j = 0; j < k; ++j)
            {
                const double gdj = gamma(d, j);
                Eigen::Map<Eigen::MatrixXd>(g + params.ws_offset(j), rows, feats)
                    .noalias() += gdj * d_d * h.transpose();
                Eigen::Map<Eigen::VectorXd>(g + params.bs_offset(j), rows) += gdj * d_d;
                const double dg =
                    d_d.dot(params.W_s(j) * h + params.b_s(j));
                g[params.gamma_offset() +
                  static_cast<std::size_t>(j) * static_cast<std::size_t>(params.domains()) +
                  static_cast<std::size_t>(d)] += dg;
            }
            if (!arch.net.hidden.empty())
            {
                Eigen::VectorXd dh = wd.transpose() * d_d + wc.transpose() * d_c;
                feature_backward(arch.net, theta, cache, std::move(dh), g, nullptr);
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(count);
    total *= inv;
    if (g != nullptr)
    {
        *grad *= inv;
    }
    if (cfg.kappa != 0.0)
    {
        const std::vector<Eigen::MatrixXd> blocks = params.blocks();
        total += cfg.kappa * orthonormality_penalty(blocks);
        if (g != nullptr)
        {
            for (int r = 0; r < rows; ++r)
            {
                const Eigen::MatrixXd ga =
                    cfg.kappa * orthonormality_gradient(blocks[static_cast<std::size_t>(r)]);
                // Column c of the block is row r of w_c (c = 0) or W_s^c.
                for (int c = 0; c <= k; ++c)
                {
                    const std::size_t base =
                        c == 0 ? arch.head_offset() : params.ws_offset(c - 1);
                    for (int f = 0; f < feats; ++f)
                    {
                        g[base + static_cast<std::size_t>(f) * static_cast<std::size_t>(rows) +
                          static_cast<std::size_t>(r)] += ga(f, c);
                    }
                }
            }
        }
    }
    return total;
}

CsdResult csd_train(const DomainDataset& data, const CSDTrainConfig& cfg,
                    const DomainDataset* test)
{
    cfg.validate();
    data.validate();
    const Architecture arch =
        Architecture::mlp(data.features(), cfg.hidden, data.classes(), cfg.head);
    CsdResult result;
    result.params =
        CsdParams::initial(arch, cfg.k, data.num_domains(), cfg.seed, cfg.init_scale);
    Eigen::VectorXd grad;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        const double obj = csd_objective(result.params, data, cfg, &grad);
        if (!std::isfinite(obj) || obj > cfg.divergence_threshold)
        {
            throw DivergenceError(
                fmt::format("CSD diverged at epoch {}: objective {}", epoch, obj));
        }
        result.trace.push_back(
            {obj, orthonormality_penalty(result.params.blocks())});
        result.params.theta() -= cfg.lr * grad;
    }
    result.common = result.params.common();
    for (int r = 0; r < arch.logit_rows(); ++r)
    {
        result.decomposition.push_back(result.params.row_decomposition(r));
    }
    result.train_metrics = evaluate(result.common, data);
    if (test != nullptr)
    {
        result.test_metrics = evaluate(result.common, *test);
    }
    return result;
}

}  // namespace domainshift
