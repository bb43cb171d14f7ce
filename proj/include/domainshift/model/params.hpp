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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace domainshift
{

/// How class logits are formed from the linear head.
enum class Head
{
    /// One weight row per class, standard softmax.
    kSoftmax,
    /// Class 0 logit pinned at zero, one row per remaining class. For two
    /// classes this is logistic regression with binary cross-entropy.
    kReferenceClass,
};

/// Stack of tanh hidden layers. An empty stack is the identity map.
struct FeatureNet
{
    int inputs = 0;
    std::vector<int> hidden;

    int output_dim() const noexcept
    {
        return hidden.empty() ? inputs : hidden.back();
    }
    std::size_t param_count() const noexcept;
};

/// Feature net followed by a linear classification head.
///
/// Flat parameter layout: for each hidden layer, W (out x in, column-major)
/// then b (out); then head W (rows x features, column-major) then b (rows).
struct Architecture
{
    FeatureNet net;
    int classes = 2;
    Head head = Head::kSoftmax;

    static Architecture linear(int inputs, int classes,
                               Head head = Head::kSoftmax);
    static Architecture mlp(int inputs, std::vector<int> hidden, int classes,
                            Head head = Head::kSoftmax);

    int logit_rows() const noexcept
    {
        return head == Head::kSoftmax ? classes : classes - 1;
    }
    int inputs() const noexcept { return net.inputs; }
    int feature_dim() const noexcept { return net.output_dim(); }
    std::size_t head_offset() const noexcept { return net.param_count(); }
    std::size_t param_count() const noexcept;

    bool operator==(const Architecture&) const = default;
};

/// Architecture plus its flat parameter vector theta.
struct ModelParams
{
    Architecture arch;
    Eigen::VectorXd theta;

    /// All-zero parameters.
    static ModelParams zeros(const Architecture& arch);

    /// Hidden layers uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from `seed`,
    /// head zero. Identical to zeros() for linear models.
    static ModelParams initial(const Architecture& arch, std::uint64_t seed);

    std::size_t size() const noexcept { return static_cast<std::size_t>(theta.size()); }

    Eigen::Map<const Eigen::MatrixXd> head_weights() const;
    Eigen::Map<const Eigen::VectorXd> head_bias() const;
    Eigen::Map<Eigen::MatrixXd> head_weights();
    Eigen::Map<Eigen::VectorXd> head_bias();
};

/// Per-example activations of a FeatureNet forward pass.
struct FeatureCache
{
    std::vector<Eigen::VectorXd> activations;  // [0] = input

    const Eigen::VectorXd& output() const { return activations.back(); }
};

/// Forward pass of the feature net on one example. `params` points at the
/// feature-net block of a flat parameter vector.
void feature_forward(const FeatureNet& net, const double* params,
                     const Eigen::Ref<const Eigen::VectorXd>& x,
                     FeatureCache& cache);

/// Backward pass: accumulates dLoss/dparams into `grad` (same layout as
/// `params`) and, when `dx` is non-null, writes dLoss/dx.
void feature_backward(const FeatureNet& net, const double* params,
                      const FeatureCache& cache, Eigen::VectorXd dfeatures,
                      double* grad, Eigen::VectorXd* dx);

/// Full class-logit vector (length `classes`) from head rows.
void expand_logits(Head head, const Eigen::Ref<const Eigen::VectorXd>& rows,
                   Eigen::VectorXd& logits);

/// Softmax probabilities and cross-entropy -log p[target] with max-logit
/// subtraction. Writes p; returns the loss.
double softmax_cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits,
                             int target, Eigen::VectorXd& probs);

/// dLoss/d(head rows) from probabilities and the target.
void head_row_gradient(Head head, const Eigen::VectorXd& probs, int target,
                       Eigen::VectorXd& drows);

}  // namespace domainshift
