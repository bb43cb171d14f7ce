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

#include "domainshift/model/params.hpp"

#include "domainshift/error.hpp"
#include "domainshift/rng.hpp"

#include <cmath>

namespace domainshift
{

std::size_t FeatureNet::param_count() const noexcept
{
    std::size_t count = 0;
    int fan_in = inputs;
    for (int width : hidden)
    {
        count += static_cast<std::size_t>(width) * static_cast<std::size_t>(fan_in + 1);
        fan_in = width;
    }
    return count;
}

Architecture Architecture::linear(int inputs, int classes, Head head)
{
    return mlp(inputs, {}, classes, head);
}

Architecture Architecture::mlp(int inputs, std::vector<int> hidden,
                               int classes, Head head)
{
    if (inputs <= 0 || classes < 2)
    {
        throw ConfigError("architecture needs inputs > 0 and classes >= 2");
    }
    for (int w : hidden)
    {
        if (w <= 0)
        {
            throw ConfigError("hidden layer widths must be positive");
        }
    }
    return Architecture{FeatureNet{inputs, std::move(hidden)}, classes, head};
}

std::size_t Architecture::param_count() const noexcept
{
    const auto rows = static_cast<std::size_t>(logit_rows());
    return net.param_count() +
           rows * static_cast<std::size_t>(feature_dim() + 1);
}

ModelParams ModelParams::zeros(const Architecture& arch)
{
    return ModelParams{arch, Eigen::VectorXd::Zero(
                                 static_cast<Eigen::Index>(arch.param_count()))};
}

ModelParams ModelParams::initial(const Architecture& arch, std::uint64_t seed)
{
    ModelParams p = zeros(arch);
    Rng rng(seed);
    Eigen::Index offset = 0;
    int fan_in = arch.net.inputs;
    for (int width : arch.net.hidden)
    {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        const Eigen::Index n = static_cast<Eigen::Index>(width) * (fan_in + 1);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            p.theta[offset + i] = bound * (2.0 * rng.uniform() - 1.0);
        }
        offset += n;
        fan_in = width;
    }
    return p;
}

Eigen::Map<const Eigen::MatrixXd> ModelParams::head_weights() const
{
    return {theta.data() + arch.head_offset(), arch.logit_rows(),
            arch.feature_dim()};
}

Eigen::Map<const Eigen::VectorXd> ModelParams::head_bias() const
{
    return {theta.data() + arch.head_offset() +
                static_cast<std::size_t>(arch.logit_rows() * arch.feature_dim()),
            arch.logit_rows()};
}

Eigen::Map<Eigen::MatrixXd> ModelParams::head_weights()
{
    return {theta.data() + arch.head_offset(), arch.logit_rows(),
            arch.feature_dim()};
}

Eigen::Map<Eigen::VectorXd> ModelParams::head_bias()
{
    return {theta.data() + arch.head_offset() +
                static_cast<std::size_t>(arch.logit_rows() * arch.feature_dim()),
            arch.logit_rows()};
}

void feature_forward(const FeatureNet& net, const double* params,
                     const Eigen::Ref<const Eigen::VectorXd>& x,
                     FeatureCache& cache)
{
    cache.activations.resize(net.hidden.size() + 1);
    cache.activations[0] = x;
    int fan_in = net.inputs;
    for (std::size_t l = 0; l < net.hidden.size(); ++l)
    {
        const int width = net.hidden[l];
        Eigen::Map<const Eigen::MatrixXd> w(params, width, fan_in);
        Eigen::Map<const Eigen::VectorXd> b(params + width * fan_in, width);
        cache.activations[l + 1] =
            (w * cache.activations[l] + b).array().tanh().matrix();
        params += static_cast<std::ptrdiff_t>(width) * (fan_in + 1);
        fan_in = width;
    }
}

void feature_backward(const FeatureNet& net, const double* params,
                      const FeatureCache& cache, Eigen::VectorXd dfeatures,
                      double* grad, Eigen::VectorXd* dx)
{
    // Offsets of each layer block, walked in reverse.
    std::vector<std::ptrdiff_t> offsets;
    std::ptrdiff_t offset = 0;
    int fan_in = net.inputs;
    for (int width : net.hidden)
    {
        offsets.push_back(offset);
        offset += static_cast<std::ptrdiff_t>(width) * (fan_in + 1);
        fan_in = width;
    }
    for (std::size_t l = net.hidden.size(); l-- > 0;)
    {
        const int width = net.hidden[l];
        const int in = l == 0 ? net.inputs : net.hidden[l - 1];
        const auto& out = cache.activations[l + 1];
        const auto& prev = cache.activations[l];
        const Eigen::VectorXd dz =
            dfeatures.array() * (1.0 - out.array().square());
        Eigen::Map<Eigen::MatrixXd> gw(grad + offsets[l], width, in);
        Eigen::Map<Eigen::VectorXd> gb(grad + offsets[l] + width * in, width);
        gw.noalias() += dz * prev.transpose();
        gb += dz;
        Eigen::Map<const Eigen::MatrixXd> w(params + offsets[l], width, in);
        dfeatures = w.transpose() * dz;
    }
    if (dx != nullptr)
    {
        *dx = std::move(dfeatures);
    }
}

void expand_logits(Head head, const Eigen::Ref<const Eigen::VectorXd>& rows,
                   Eigen::VectorXd& logits)
{
    if (head == Head::kSoftmax)
    {
        logits = rows;
        return;
    }
    logits.resize(rows.size() + 1);
    logits[0] = 0.0;
    logits.tail(rows.size()) = rows;
}

double softmax_cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits,
                             int target, Eigen::VectorXd& probs)
{
    const double top = logits.maxCoeff();
    probs = (logits.array() - top).exp().matrix();
    const double sum = probs.sum();
    probs /= sum;
    // log-sum-exp form keeps the loss exact when p[target] underflows.
    return std::log(sum) + top - logits[target];
}

void head_row_gradient(Head head, const Eigen::VectorXd& probs, int target,
                       Eigen::VectorXd& drows)
{
    if (head == Head::kSoftmax)
    {
        drows = probs;
        drows[target] -= 1.0;
        return;
    }
    drows = probs.tail(probs.size() - 1);
    if (target > 0)
    {
        drows[target - 1] -= 1.0;
    }
}

}  // namespace domainshift
