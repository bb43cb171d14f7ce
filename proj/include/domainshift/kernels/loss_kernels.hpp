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

#include "domainshift/model/dataset.hpp"
#include "domainshift/model/params.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace domainshift
{

/// Which kernel family evaluates a batch.
enum class Exec
{
    /// Plain loop in example order. Kept as the reference for tests.
    kSerial,
    /// OpenMP over fixed-size chunks of rows; chunk partials are combined in
    /// chunk order, so the result does not depend on the thread count.
    kParallel,
};

struct LossGrad
{
    double loss = 0.0;
    Eigen::VectorXd grad;
};

namespace kernels
{

/// Rows per chunk of the parallel reduction. Part of the numeric contract:
/// changing it changes the last bits of every parallel result.
inline constexpr std::size_t kChunkRows = 64;

/// Sum over rows of cross-entropy and its parameter gradient.
LossGrad sum_loss_grad_serial(const ModelParams& params, const RowMatrix& x,
                              std::span<const int> y);
LossGrad sum_loss_grad_parallel(const ModelParams& params, const RowMatrix& x,
                                std::span<const int> y);

/// Sum over rows of cross-entropy only.
double sum_loss_serial(const ModelParams& params, const RowMatrix& x,
                       std::span<const int> y);
double sum_loss_parallel(const ModelParams& params, const RowMatrix& x,
                         std::span<const int> y);

/// Number of rows whose argmax logit equals the target (ties -> lowest class).
std::size_t count_correct(const ModelParams& params, const RowMatrix& x,
                          std::span<const int> y, Exec exec);

/// Row i = d loss(x_i, y_i) / d x_i (per-example, not averaged).
RowMatrix input_grad_rows_serial(const ModelParams& params, const RowMatrix& x,
                                 std::span<const int> y);
RowMatrix input_grad_rows_parallel(const ModelParams& params,
                                   const RowMatrix& x, std::span<const int> y);

/// Dispatch helpers.
LossGrad sum_loss_grad(const ModelParams& params, const RowMatrix& x,
                       std::span<const int> y, Exec exec);
double sum_loss(const ModelParams& params, const RowMatrix& x,
                std::span<const int> y, Exec exec);
RowMatrix input_grad_rows(const ModelParams& params, const RowMatrix& x,
                          std::span<const int> y, Exec exec);

}  // namespace kernels
}  // namespace domainshift
