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

#include <string>
#include <vector>

namespace domainshift
{

/// W = w_c 1^T + W_s Gamma^T with w_c orthogonal to span(W_s).
struct Decomposition
{
    Eigen::VectorXd w_c;    // m
    Eigen::MatrixXd W_s;    // m x k
    Eigen::MatrixXd Gamma;  // D x k
    int k = 0;
    /// Set when the rank condition fails and the minimizer is not unique.
    bool non_unique = false;
    std::string warning;

    /// w_c 1^T + W_s Gamma^T.
    Eigen::MatrixXd reconstruction() const;
};

/// ||W - w_c 1^T - W_s Gamma^T||_F^2.
double decomposition_objective(const Eigen::MatrixXd& W, const Decomposition& dec);

/// Closed-form minimizer of the objective subject to w_c orthogonal to
/// span(W_s), rank k. Columns of W are the per-domain classifiers.
/// Throws ConfigError unless 0 <= k <= D - 1 and D >= 2.
Decomposition svd_decompose(const Eigen::MatrixXd& W, int k);

/// (1/D) W 1.
Eigen::VectorXd common_mean(const Eigen::MatrixXd& W);

/// a / ||a||^2 with a = (W^T)^+ 1. Throws DegenerateInputError when a ~ 0.
Eigen::VectorXd common_pinv(const Eigen::MatrixXd& W);

/// e_c - P_{E_s} e_c. Throws DegenerateInputError if E_s is rank deficient.
Eigen::VectorXd project_orthogonal(const Eigen::VectorXd& e_c,
                                   const Eigen::MatrixXd& E_s);

/// Ground truth W = e_c 1^T + E_s Gamma_hat^T.
struct GenerativeSpec
{
    Eigen::VectorXd e_c;
    Eigen::MatrixXd E_s;        // m x k
    Eigen::MatrixXd Gamma_hat;  // D x k

    Eigen::MatrixXd classifiers() const;
};

/// Checks the characterization w_c = e_c - P_{E_s} e_c  <=>  w_c orthogonal
/// to span(W_s). True when `dec` is a decomposition of W (within 1e-8,
/// relative to ||W||) of the stated ranks and both sides agree at 1e-8.
bool lemma_check(const Eigen::MatrixXd& W, const Decomposition& dec,
                 const GenerativeSpec& truth);

/// sum_r ||I - A_r^T A_r||_F^2 over blocks A_r = [w_c[r], W_s[r]] (m x (k+1)).
double orthonormality_penalty(const std::vector<Eigen::MatrixXd>& blocks);

/// Single block [w_c, W_s].
double orthonormality_penalty(const Eigen::VectorXd& w_c,
                              const Eigen::MatrixXd& W_s);

/// d/dA ||I - A^T A||_F^2 = -4 A (I - A^T A).
Eigen::MatrixXd orthonormality_gradient(const Eigen::MatrixXd& block);

}  // namespace domainshift
