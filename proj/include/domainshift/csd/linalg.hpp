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

namespace domainshift::linalg
{

/// Thin SVD A = U diag(S) V^T with singular values descending and the first
/// nonzero entry of every left singular vector positive.
struct Svd
{
    Eigen::MatrixXd U;
    Eigen::VectorXd S;
    Eigen::MatrixXd V;
};

Svd svd(const Eigen::MatrixXd& a);

/// 1e-10 * largest singular value (0 for an all-zero spectrum).
double tolerance(const Eigen::VectorXd& singular_values);

/// Number of singular values above tolerance().
int rank(const Eigen::MatrixXd& a);

/// Moore-Penrose pseudoinverse, truncated at tolerance().
Eigen::MatrixXd pinv(const Eigen::MatrixXd& a);

/// Orthogonal projector onto the column span of `a`.
Eigen::MatrixXd projector(const Eigen::MatrixXd& a);

}  // namespace domainshift::linalg
