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

#include "domainshift/crossgrad/config.hpp"
#include "domainshift/reweighting/train.hpp"

#include <span>
#include <vector>

namespace domainshift
{

/// Label network (predicts y) and domain network (predicts d). They share
/// no parameters.
struct DualParams
{
    ModelParams theta_label;
    ModelParams theta_domain;
};

/// Gradient of the mean cross-entropy over the rows of X with respect to X.
RowMatrix input_grad(const ModelParams& params, const RowMatrix& x,
                     std::span<const int> targets, Exec exec = Exec::kParallel);

/// X + eps * grad.
RowMatrix perturb(const RowMatrix& x, const RowMatrix& grad, double eps);

/// One simultaneous update of both networks. `batches[i]` holds the examples
/// of domain i; their domain label is i. Only the label net reads y and only
/// the domain net reads the domain index.
DualParams crossgrad_step(const DualParams& dual, std::span<const Batch> batches,
                          const CrossGradConfig& cfg, Exec exec = Exec::kParallel);

/// Initial networks: the label net from `label_arch` (zero head), the domain
/// net a tanh MLP with cfg.domain_hidden layers over k domain classes.
DualParams initial_dual(const Architecture& label_arch, int domains,
                        const CrossGradConfig& cfg);

/// Full training run; lr, epochs and seed come from `cfg`, the perturbation
/// settings from cfg.crossgrad. The result evaluates the label network.
RunResult crossgrad_train(const DomainDataset& data, const TrainConfig& cfg,
                          const DomainDataset* test = nullptr);

/// Same run configured from a CrossGradConfig alone (linear label net,
/// reference-class head for two classes).
RunResult crossgrad_train(const DomainDataset& data, const CrossGradConfig& cfg,
                          const DomainDataset* test = nullptr);

}  // namespace domainshift
