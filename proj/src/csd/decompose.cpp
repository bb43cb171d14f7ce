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

#include "domainshift/csd/decompose.hpp"

#include "domainshift/csd/linalg.hpp"
#include "domainshift/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace domainshift
{

Eigen::MatrixXd Decomposition::reconstruction() const
{
    const Eigen::Index D = Gamma.rows();
    Eigen::MatrixXd m = w_c * Eigen::RowVectorXd::Ones(D);
    if (k > 0)
    {
        m.noalias() += W_s * Gamma.transpose();
    }
    return m;
}

double decomposition_objective(const Eigen::MatrixXd& W, const Decomposition& dec)
{
    if (dec.w_c.size() != W.rows() || dec.Gamma.rows() != W.cols() ||
        dec.W_s.rows() != W.rows() || dec.W_s.cols() != dec.Gamma.cols())
    {
        throw ConfigError("decomposition shape does not match W");
    }
    return (W - dec.reconstruction()).squaredNorm();
}

Eigen::VectorXd common_mean(const Eigen::MatrixXd& W)
{
    if (W.cols() == 0)
    {
        throw ConfigError("common_mean of an empty classifier bank");
    }
    return W.rowwise().sum() / static_cast<double>(W.cols());
}

Eigen::VectorXd common_pinv(const Eigen::MatrixXd& W)
{
    const Eigen::VectorXd a =
        linalg::pinv(W.transpose()) * Eigen::VectorXd::Ones(W.cols());
    const double norm2 = a.squaredNorm();
    if (!(std::sqrt(norm2) > 1e-12))
    {
        throw DegenerateInputError("pseudoinverse of the classifier bank maps 1 to 0");
    }
    return a / norm2;
}

namespace
{

/// Top-k factors of `a`: W_s = U_k S_k, Gamma = V_k.
void top_k(const Eigen::MatrixXd& a, int k, Eigen::MatrixXd& W_s,
           Eigen::MatrixXd& Gamma)
{
    W_s = Eigen::MatrixXd::Zero(a.rows(), k);
    Gamma = Eigen::MatrixXd::Zero(a.cols(), k);
    if (k == 0)
    {
        return;
    }
    const linalg::Svd s = linalg::svd(a);
    const int avail = static_cast<int>(s.S.size());
    for (int j = 0; j < std::min(k, avail); ++j)
    {
        W_s.col(j) = s.U.col(j) * s.S[j];
        Gamma.col(j) = s.V.col(j);
    }
}

}  // namespace

Decomposition svd_decompose(const Eigen::MatrixXd& W, int k)
{
    const auto D = static_cast<int>(W.cols());
    if (D < 2)
    {
        throw ConfigError("svd_decompose needs at least two domains");
    }
    if (k < 0 || k > D - 1)
    {
        throw ConfigError(fmt::format("rank k = {} outside [0, {}]", k, D - 1));
    }
    if (!W.allFinite())
    {
        throw NumericError("classifier bank has non-finite entries");
    }
    Decomposition dec;
    dec.k = k;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(D);

    const Eigen::VectorXd w_c = common_mean(W);
    Eigen::MatrixXd W_s;
    Eigen::MatrixXd Gamma;
    top_k(W - w_c * ones.transpose(), k, W_s, Gamma);
    const Eigen::MatrixXd M = w_c * ones.transpose() + W_s * Gamma.transpose();

    const linalg::Svd sw = linalg::svd(W);
    const double tau = linalg::tolerance(sw.S);
    if (k + 1 > sw.S.size() || sw.S[k] <= tau)
    {
        dec.non_unique = true;
        dec.warning = fmt::format(
            "rank(W) < k + 1 = {}; the minimizer is not unique", k + 1);
    }

    const Eigen::VectorXd a = linalg::pinv(M.transpose()) * ones;
    const double norm2 = a.squaredNorm();
    if (!(std::sqrt(norm2) > 1e-12))
    {
        // M = 0: every w_c in the orthogonal complement is optimal.
        dec.non_unique = true;
        dec.warning = "rank-(k+1) approximation is zero";
        dec.w_c = Eigen::VectorXd::Zero(W.rows());
        dec.W_s = W_s;
        dec.Gamma = Gamma;
        return dec;
    }
    dec.w_c = a / norm2;
    top_k(M - dec.w_c * ones.transpose(), k, dec.W_s, dec.Gamma);
    return dec;
}

Eigen::VectorXd project_orthogonal(const Eigen::VectorXd& e_c,
                                   const Eigen::MatrixXd& E_s)
{
    if (E_s.rows() != e_c.size())
    {
        throw ConfigError("project_orthogonal: dimension mismatch");
    }
    if (E_s.cols() == 0)
    {
        return e_c;
    }
    if (linalg::rank(E_s) < E_s.cols())
    {
        throw DegenerateInputError("E_s is not of full column rank");
    }
    // Least-squares coefficients of e_c on the columns of E_s.
    const Eigen::VectorXd coef = E_s.colPivHouseholderQr().solve(e_c);
    return e_c - E_s * coef;
}

Eigen::MatrixXd GenerativeSpec::classifiers() const
{
    return e_c * Eigen::RowVectorXd::Ones(Gamma_hat.rows()) +
           E_s * Gamma_hat.transpose();
}

bool lemma_check(const Eigen::MatrixXd& W, const Decomposition& dec,
                 const GenerativeSpec& truth)
{
    constexpr double kTol = 1e-8;
    const double scale = std::max(1.0, W.norm());
    const int k = dec.k;
    // Hypothesis: both factorizations describe W and have the stated ranks.
    if ((W - dec.reconstruction()).norm() > kTol * scale ||
        (W - truth.classifiers()).norm() > kTol * scale)
    {
        return false;
    }
    if (linalg::rank(W) != k + 1)
    {
        return false;
    }
    if (k > 0 && (linalg::rank(dec.W_s) != k || linalg::rank(dec.Gamma) != k ||
                  linalg::rank(truth.E_s) != k))
    {
        return false;
    }
    const Eigen::VectorXd target = project_orthogonal(truth.e_c, truth.E_s);
    const bool is_projection =
        (dec.w_c - target).norm() <= kTol * std::max(1.0, target.norm());
    const bool orthogonal =
        k == 0 || (linalg::projector(dec.W_s) * dec.w_c).norm() <=
                      kTol * std::max(1.0, dec.w_c.norm());
    return is_projection == orthogonal;
}

double orthonormality_penalty(const std::vector<Eigen::MatrixXd>& blocks)
{
    double total = 0.0;
    for (const auto& a : blocks)
    {
        const Eigen::MatrixXd gram = a.transpose() * a;
        total += (Eigen::MatrixXd::Identity(a.cols(), a.cols()) - gram).squaredNorm();
    }
    return total;
}

double orthonormality_penalty(const Eigen::VectorXd& w_c,
                              const Eigen::MatrixXd& W_s)
{
    Eigen::MatrixXd a(w_c.size(), W_s.cols() + 1);
    a.col(0) = w_c;
    a.rightCols(W_s.cols()) = W_s;
    return orthonormality_penalty(std::vector<Eigen::MatrixXd>{a});
}

Eigen::MatrixXd orthonormality_gradient(const Eigen::MatrixXd& block)
{
    const Eigen::MatrixXd resid =
        Eigen::MatrixXd::Identity(block.cols(), block.cols()) -
        block.transpose() * block;
    return -4.0 * block * resid;
}

}  // namespace domainshift
