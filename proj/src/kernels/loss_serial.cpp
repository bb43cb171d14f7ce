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

namespace domainshift::kernels
{

LossGrad sum_loss_grad_serial(const ModelParams& params, const RowMatrix& x,
                              std::span<const int> y)
{
    LossGrad out{0.0, Eigen::VectorXd::Zero(params.theta.size())};
    detail::Workspace ws;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
    {
        out.loss += detail::loss_grad(params, x.row(i).transpose(),
                                      y[static_cast<std::size_t>(i)], ws,
                                      out.grad.data(), nullptr);
    }
    return out;
}

double sum_loss_serial(const ModelParams& params, const RowMatrix& x,
                       std::span<const int> y)
{
    double total = 0.0;
    detail::Workspace ws;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
    {
        total += detail::loss(params, x.row(i).transpose(),
                              y[static_cast<std::size_t>(i)], ws);
    }
    return total;
}

RowMatrix input_grad_rows_serial(const ModelParams& params, const RowMatrix& x,
                                 std::span<const int> y)
{
    RowMatrix out(x.rows(), x.cols());
    detail::Workspace ws;
    Eigen::VectorXd dx;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
    {
        detail::loss_grad(params, x.row(i).transpose(),
                          y[static_cast<std::size_t>(i)], ws, nullptr, &dx);
        out.row(i) = dx.transpose();
    }
    return out;
}

}  // namespace domainshift::kernels
