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

#include <cstdint>
#include <vector>

namespace domainshift
{

struct CrossGradConfig
{
    /// Scales the domain-gradient perturbation X_d = X + eps_label grad J_d.
    /// Default picked by worst-domain validation accuracy over
    /// {0.1, 0.5, 1, 2} on held-out draws of the training domains.
    double eps_label = 0.1;
    /// Scales the label-gradient perturbation X_l = X + eps_domain grad J_l.
    double eps_domain = 0.1;
    double alpha_label = 0.5;
    double alpha_domain = 0.5;
    double lr = 0.1;
    int epochs = 400;
    std::uint64_t seed = 0;
    /// Hidden tanh layers of the domain network.
    std::vector<int> domain_hidden = {16};
    /// Perturb along per-example input gradients (true) or along the gradient
    /// of the batch-mean loss (false, which shrinks the step by 1/batch).
    bool per_example = true;

    void validate() const;
};

}  // namespace domainshift
