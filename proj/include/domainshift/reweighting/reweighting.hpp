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

#include "domainshift/model/model_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace domainshift
{

/// A point alpha on the probability simplex, one weight per domain.
struct DomainWeights
{
    Eigen::VectorXd alpha;

    /// 1/k each, computed as ones / sum so that it matches erm_uw_weights(n, 0).
    static DomainWeights uniform(int k);

    int size() const noexcept { return static_cast<int>(alpha.size()); }

    /// Throws ConfigError unless entries are positive and sum to 1 (1e-9).
    void validate() const;
};

enum class CgdVariant
{
    /// alpha_i <- alpha_i exp(eta_alpha <g_i, sum_j g_j>)
    kInnerProduct,
    /// alpha_i <- alpha_i exp(eta_alpha sum_j l_i^p l_j^p cos(g_i, g_j))
    kScaledCosine,
};

/// Gradient used for the parameter step.
enum class ThetaGradient
{
    kRaw,
    /// scale_gradient(g_i, l_i, p)
    kScaled,
};

struct CGDConfig
{
    double eta = 0.1;
    double eta_alpha = 0.01;
    double p = 0.5;
    double C = 0.0;
    CgdVariant variant = CgdVariant::kScaledCosine;
    ThetaGradient theta_gradient = ThetaGradient::kRaw;
    int epochs = 400;
    std::uint64_t seed = 0;

    void validate() const;
};

/// alpha_i proportional to exp(C / sqrt(n_i)).
DomainWeights erm_uw_weights(std::span<const int> n, double C);

/// l_i + C / sqrt(n_i).
Eigen::VectorXd choice_adjust(const Eigen::Ref<const Eigen::VectorXd>& losses,
                              std::span<const int> n, double C);

/// argmax, ties to the lowest index.
int group_dro_select(const Eigen::Ref<const Eigen::VectorXd>& adjusted_losses);

/// alpha_i * exp(e_i) / Z with max-subtraction. Returns alpha unchanged when
/// all exponents are equal. Throws NumericError on a non-finite exponent.
DomainWeights multiplicative_update(const DomainWeights& alpha,
                                    const Eigen::Ref<const Eigen::VectorXd>& exponents);

/// One CGD weight update from gradients at the current parameters.
DomainWeights cgd_alpha_update(const DomainWeights& alpha,
                               const GradientSet& gs, double eta_alpha,
                               CgdVariant variant, double p, double C,
                               std::span<const int> n);

/// theta - eta * sum_i w_i * row_i(grads), summed in domain order.
Eigen::VectorXd weighted_step(const Eigen::VectorXd& theta,
                              const Eigen::Ref<const Eigen::VectorXd>& weights,
                              const Eigen::Ref<const Eigen::MatrixXd>& grads,
                              double eta);

/// One CGD iteration: alpha first (gradients at theta), then theta.
std::pair<ModelParams, DomainWeights> cgd_step(
    const ModelParams& params, const DomainWeights& alpha,
    const DomainDataset& data, const CGDConfig& cfg,
    const Sampling& sampling = Sampling::full_batch(),
    Exec exec = Exec::kParallel);

/// Norm of the gradient of the macro risk R = (1/k) sum_i l_i.
double fosp_norm(const ModelParams& params, const DomainDataset& data,
                 Exec exec = Exec::kParallel);

/// Macro risk R = (1/k) sum_i l_i.
double macro_risk(const ModelParams& params, const DomainDataset& data,
                  Exec exec = Exec::kParallel);

struct ConvergenceBudget
{
    double B = 1.0;
    double L = 1.0;
    double G = 1.0;
    long long T = 1;
    double epsilon = 0.05;

    void validate() const;

    /// Iterations after which the averaged squared gradient norm bound
    /// 3 sqrt(B L G^2 / T) drops to epsilon^2.
    static long long iterations_for(double B, double L, double G, double epsilon);
};

struct StepSizes
{
    double eta = 0.0;
    double eta_alpha = 0.0;
};

/// eta = 2 sqrt(B / (L G^2 T)), eta_alpha = sqrt(B L / (G^6 T)).
StepSizes theorem_step_sizes(const ConvergenceBudget& budget);

}  // namespace domainshift
