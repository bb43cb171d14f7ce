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

// Per-example forward/backward shared by the serial and OpenMP kernels.

#include "domainshift/model/params.hpp"

#include <Eigen/Dense>

namespace domainshift::kernels::detail
{

struct Workspace
{
    FeatureCache cache;
    Eigen::VectorXd rows;
    Eigen::VectorXd logits;
    Eigen::VectorXd probs;
    Eigen::VectorXd drows;
};

inline void forward(const ModelParams& p,
                    const Eigen::Ref<const Eigen::VectorXd>& x, Workspace& ws)
{
    feature_forward(p.arch.net, p.theta.data(), x, ws.cache);
    ws.rows = p.head_weights() * ws.cache.output() + p.head_bias();
    expand_logits(p.arch.head, ws.rows, ws.logits);
}

inline double loss(const ModelParams& p,
                   const Eigen::Ref<const Eigen::VectorXd>& x, int y,
                   Workspace& ws)
{
    forward(p, x, ws);
    return softmax_cross_entropy(ws.logits, y, ws.probs);
}

/// Adds d loss / d theta into `grad`; returns the loss. When `dx` is
/// non-null it receives d loss / d x.
inline double loss_grad(const ModelParams& p,
                        const Eigen::Ref<const Eigen::VectorXd>& x, int y,
                        Workspace& ws, double* grad, Eigen::VectorXd* dx)
{
    const double value = loss(p, x, y, ws);
    head_row_gradient(p.arch.head, ws.probs, y, ws.drows);
    const auto& h = ws.cache.output();
    const Eigen::Index rows = p.arch.logit_rows();
    const Eigen::Index feats = p.arch.feature_dim();
    const std::size_t head = p.arch.head_offset();
    if (grad != nullptr)
    {
        Eigen::Map<Eigen::MatrixXd> gw(grad + head, rows, feats);
        Eigen::Map<Eigen::VectorXd> gb(grad + head + rows * feats, rows);
        gw.noalias() += ws.drows * h.transpose();
        gb += ws.drows;
    }
    if (!p.arch.net.hidden.empty() || dx != nullptr)
    {
        Eigen::VectorXd dh = p.head_weights().transpose() * ws.drows;
        if (p.arch.net.hidden.empty())
        {
            *dx = std::move(dh);
        }
        else
        {
            // feature_backward always accumulates into a gradient buffer.
            Eigen::VectorXd scratch;
            double* target = grad;
            if (target == nullptr)
            {
                scratch = Eigen::VectorXd::Zero(
                    static_cast<Eigen::Index>(p.arch.net.param_count()));
                target = scratch.data();
            }
            feature_backward(p.arch.net, p.theta.data(), ws.cache,
                             std::move(dh), target, dx);
        }
    }
    return value;
}

inline int argmax_class(const ModelParams& p,
                        const Eigen::Ref<const Eigen::VectorXd>& x,
                        Workspace& ws)
{
    forward(p, x, ws);
    Eigen::Index best = 0;
    ws.logits.maxCoeff(&best);
    return static_cast<int>(best);
}

}  // namespace domainshift::kernels::detail
