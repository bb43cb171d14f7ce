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

#include "domainshift/kernels/loss_kernels.hpp"

#include "example_ops.hpp"

#include <algorithm>
#include <vector>

namespace domainshift::kernels
{
namespace
{

struct ChunkRange
{
    Eigen::Index begin;
    Eigen::Index end;
};

Eigen::Index chunk_count(Eigen::Index rows)
{
    const auto chunk = static_cast<Eigen::Index>(kChunkRows);
    return (rows + chunk - 1) / chunk;
}

ChunkRange chunk_range(Eigen::Index c, Eigen::Index rows)
{
    const auto chunk = static_cast<Eigen::Index>(kChunkRows);
    return {c * chunk, std::min(rows, (c + 1) * chunk)};
}

}  // namespace

LossGrad sum_loss_grad_parallel(const ModelParams& params, const RowMatrix& x,
                                std::span<const int> y)
{
    const Eigen::Index rows = x.rows();
    const Eigen::Index chunks = chunk_count(rows);
    const Eigen::Index p = params.theta.size();
    Eigen::MatrixXd partial_grad = Eigen::MatrixXd::Zero(p, chunks);
    std::vector<double> partial_loss(static_cast<std::size_t>(chunks), 0.0);

#pragma omp parallel
    {
        detail::Workspace ws;
#pragma omp for schedule(static)
        for (Eigen::Index c = 0; c < chunks; ++c)
        {
            const auto [begin, end] = chunk_range(c, rows);
            double* grad = partial_grad.col(c).data();
            double loss = 0.0;
            for (Eigen::Index i = begin; i < end; ++i)
            {
                loss += detail::loss_grad(params, x.row(i).transpose(),
                                          y[static_cast<std::size_t>(i)], ws,
                                          grad, nullptr);
            }
            partial_loss[static_cast<std::size_t>(c)] = loss;
        }
    }

    LossGrad out{0.0, Eigen::VectorXd::Zero(p)};
    for (Eigen::Index c = 0; c < chunks; ++c)
    {
        out.loss += partial_loss[static_cast<std::size_t>(c)];
        out.grad += partial_grad.col(c);
    }
    return out;
}

double sum_loss_parallel(const ModelParams& params, const RowMatrix& x,
                         std::span<const int> y)
{
    const Eigen::Index rows = x.rows();
    const Eigen::Index chunks = chunk_count(rows);
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);

#pragma omp parallel
    {
        detail::Workspace ws;
#pragma omp for schedule(static)
        for (Eigen::Index c = 0; c < chunks; ++c)
        {
            const auto [begin, end] = chunk_range(c, rows);
            double loss = 0.0;
            for (Eigen::Index i = begin; i < end; ++i)
            {
                loss += detail::loss(params, x.row(i).transpose(),
                                     y[static_cast<std::size_t>(i)], ws);
            }
            partial[static_cast<std::size_t>(c)] = loss;
        }
    }

    double total = 0.0;
    for (double v : partial)
    {
        total += v;
    }
    return total;
}

RowMatrix input_grad_rows_parallel(const ModelParams& params,
                                   const RowMatrix& x, std::span<const int> y)
{
    RowMatrix out(x.rows(), x.cols());
#pragma omp parallel
    {
        detail::Workspace ws;
        Eigen::VectorXd dx;
#pragma omp for schedule(static)
        for (Eigen::Index i = 0; i < x.rows(); ++i)
        {
            detail::loss_grad(params, x.row(i).transpose(),
                              y[static_cast<std::size_t>(i)], ws, nullptr, &dx);
            out.row(i) = dx.transpose();
        }
    }
    return out;
}

std::size_t count_correct(const ModelParams& params, const RowMatrix& x,
                          std::span<const int> y, Exec exec)
{
    std::size_t correct = 0;
    if (exec == Exec::kSerial)
    {
        detail::Workspace ws;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
        {
            correct += detail::argmax_class(params, x.row(i).transpose(), ws) ==
                       y[static_cast<std::size_t>(i)];
        }
        return correct;
    }
#pragma omp parallel reduction(+ : correct)
    {
        detail::Workspace ws;
#pragma omp for schedule(static)
        for (Eigen::Index i = 0; i < x.rows(); ++i)
        {
            correct += detail::argmax_class(params, x.row(i).transpose(), ws) ==
                       y[static_cast<std::size_t>(i)];
        }
    }
    return correct;
}

LossGrad sum_loss_grad(const ModelParams& params, const RowMatrix& x,
                       std::span<const int> y, Exec exec)
{
    return exec == Exec::kSerial ? sum_loss_grad_serial(params, x, y)
                                 : sum_loss_grad_parallel(params, x, y);
}

double sum_loss(const ModelParams& params, const RowMatrix& x,
                std::span<const int> y, Exec exec)
{
    return exec == Exec::kSerial ? sum_loss_serial(params, x, y)
                                 : sum_loss_parallel(params, x, y);
}

RowMatrix input_grad_rows(const ModelParams& params, const RowMatrix& x,
                          std::span<const int> y, Exec exec)
{
    return exec == Exec::kSerial ? input_grad_rows_serial(params, x, y)
                                 : input_grad_rows_parallel(params, x, y);
}

}  // namespace domainshift::kernels
