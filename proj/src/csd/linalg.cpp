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

#include "domainshift/csd/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace domainshift::linalg
{

Svd svd(const Eigen::MatrixXd& a)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    // JacobiSVD already sorts descending; fix the sign of each pair.
    for (Eigen::Index j = 0; j < out.U.cols(); ++j)
    {
        const double scale = out.U.col(j).cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < out.U.rows(); ++i)
        {
            const double u = out.U(i, j);
            if (std::abs(u) > 1e-12 * scale)
            {
                if (u < 0.0)
                {
                    out.U.col(j) *= -1.0;
                    out.V.col(j) *= -1.0;
                }
                break;
            }
        }
    }
    return out;
}

double tolerance(const Eigen::VectorXd& singular_values)
{
    return singular_values.size() == 0 ? 0.0 : 1e-10 * singular_values.maxCoeff();
}

int rank(const Eigen::MatrixXd& a)
{
    const Svd s = svd(a);
    const double tau = tolerance(s.S);
    int r = 0;
    for (Eigen::Index i = 0; i < s.S.size(); ++i)
    {
        r += s.S[i] > tau ? 1 : 0;
    }
    return r;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& a)
{
    const Svd s = svd(a);
    const double tau = tolerance(s.S);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < s.S.size(); ++i)
    {
        if (s.S[i] > tau)
        {
            out.noalias() += s.V.col(i) * (s.U.col(i).transpose() / s.S[i]);
        }
    }
    return out;
}

Eigen::MatrixXd projector(const Eigen::MatrixXd& a)
{
    const Svd s = svd(a);
    const double tau = tolerance(s.S);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(a.rows(), a.rows());
    for (Eigen::Index i = 0; i < s.S.size(); ++i)
    {
        if (s.S[i] > tau)
        {
            p.noalias() += s.U.col(i) * s.U.col(i).transpose();
        }
    }
    return p;
}

}  // namespace domainshift::linalg
