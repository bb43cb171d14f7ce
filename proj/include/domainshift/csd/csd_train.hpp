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

#include "domainshift/csd/decompose.hpp"
#include "domainshift/model/model_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace domainshift
{

struct CSDTrainConfig
{
    int k = 1;
    double lambda = 1.0;
    double kappa = 1.0;
    int epochs = 400;
    double lr = 0.1;
    std::uint64_t seed = 0;
    /// Feature network hidden layers (empty = raw inputs).
    std::vector<int> hidden;
    Head head = Head::kSoftmax;
    /// Standard deviation of the initial W_s, b_s and Gamma entries.
    double init_scale = 0.1;
    double divergence_threshold = 1e6;

    void validate() const;
};

/// Feature net, common head (w_c, b_c), k specific heads (W_s^j, b_s^j) and
/// the domain embedding Gamma (D x k), in one flat vector:
/// [features | w_c | b_c | W_s^1..W_s^k | b_s^1..b_s^k | Gamma].
/// Head matrices are rows x features, column-major.
class CsdParams
{
public:
    CsdParams() = default;
    CsdParams(Architecture arch, int k, int domains);

    static CsdParams initial(const Architecture& arch, int k, int domains,
                             std::uint64_t seed, double init_scale);

    const Architecture& arch() const noexcept { return arch_; }
    int k() const noexcept { return k_; }
    int domains() const noexcept { return domains_; }
    Eigen::VectorXd& theta() noexcept { return theta_; }
    const Eigen::VectorXd& theta() const noexcept { return theta_; }

    /// Inference model: feature net plus the common head only.
    ModelParams common() const;

    Eigen::Map<const Eigen::MatrixXd> w_c() const;
    Eigen::Map<const Eigen::VectorXd> b_c() const;
    Eigen::Map<const Eigen::MatrixXd> W_s(int j) const;
    Eigen::Map<const Eigen::VectorXd> b_s(int j) const;
    Eigen::Map<const Eigen::MatrixXd> gamma() const;

    std::size_t ws_offset(int j) const;
    std::size_t bs_offset(int j) const;
    std::size_t gamma_offset() const;

    /// Orthonormality blocks [w_c[r], W_s^1[r] .. W_s^k[r]], one per logit row.
    std::vector<Eigen::MatrixXd> blocks() const;

    /// Decomposition of logit row r across domains.
    Decomposition row_decomposition(int r) const;

private:
    Architecture arch_;
    int k_ = 0;
    int domains_ = 0;
    Eigen::VectorXd theta_;
};

/// mean_examples[ CE(w_d) + lambda CE(w_c) ] + kappa R. Fills `grad` when
/// non-null.
double csd_objective(const CsdParams& params, const DomainDataset& data,
                     const CSDTrainConfig& cfg, Eigen::VectorXd* grad);

struct CsdEpoch
{
    double objective = 0.0;
    double penalty = 0.0;
};

struct CsdResult
{
    CsdParams params;
    ModelParams common;
    std::vector<CsdEpoch> trace;
    /// Final per-row decompositions of the last layer.
    std::vector<Decomposition> decomposition;
    DomainMetrics train_metrics;
    std::optional<DomainMetrics> test_metrics;
};

/// Full-batch gradient descent on csd_objective. Only (features, w_c, b_c)
/// are used for the returned metrics.
CsdResult csd_train(const DomainDataset& data, const CSDTrainConfig& cfg,
                    const DomainDataset* test = nullptr);

}  // namespace domainshift
