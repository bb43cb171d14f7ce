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

// Independent reference computations used only by tests and the check
// runner. Nothing here calls the library code under test.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace domainshift::oracles
{

/// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// Maximizes a concave f over the simplex by projected gradient ascent with
/// backtracking, starting from `x0`. Iterates stay at least `floor` from
/// the boundary.
Eigen::VectorXd simplex_maximize(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x0, int iterations = 20000, double floor = 1e-12);

/// argmax over the simplex of eta <a, c> - KL(a || alpha), c_i = <g_i, sum_j g_j>,
/// for gradients stored as rows of `grads`.
Eigen::VectorXd alpha_objective_argmax(const Eigen::VectorXd& alpha,
                                       const Eigen::MatrixXd& grads, double eta);

/// Exhaustive grid over the 2-simplex (k = 3) at the given resolution.
Eigen::VectorXd alpha_objective_grid(const Eigen::VectorXd& alpha,
                                     const Eigen::MatrixXd& grads, double eta,
                                     int resolution);

/// The objective maximized by the two functions above.
double alpha_objective(const Eigen::VectorXd& a, const Eigen::VectorXd& alpha,
                       const Eigen::MatrixXd& grads, double eta);

/// ||W - w_c 1^T - W_s Gamma^T||^2 from explicit loops.
double decomposition_residual(const Eigen::MatrixXd& W, const Eigen::VectorXd& w_c,
                              const Eigen::MatrixXd& W_s, const Eigen::MatrixXd& Gamma);

/// Smallest objective found by projected gradient descent over (w_c, W_s,
/// Gamma) from `restarts` random starts. After each step w_c is projected
/// onto the orthogonal complement of span(W_s) by a normal-equation solve.
double decomposition_min(const Eigen::MatrixXd& W, int k, int restarts = 50,
                         int iterations = 1500, std::uint64_t seed = 0);

/// Binary cross-entropy of sigmoid(w.x + b), summed over rows, from plain
/// scalar loops. Labels are 0/1.
double logistic_loss(const Eigen::MatrixXd& X, const std::vector<int>& y,
                     const Eigen::VectorXd& w, double b);
/// Gradient of logistic_loss with respect to (w, b).
Eigen::VectorXd logistic_grad(const Eigen::MatrixXd& X, const std::vector<int>& y,
                              const Eigen::VectorXd& w, double b);

/// Softmax cross-entropy of W x + b (rows = classes), summed over rows of X.
double softmax_loss(const Eigen::MatrixXd& X, const std::vector<int>& y,
                    const Eigen::MatrixXd& W, const Eigen::VectorXd& b);

/// Minimizer of the mean logistic loss (plus ridge * ||w||^2 / 2) by damped
/// Newton iterations. Returns (w, b) stacked.
Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             double ridge = 0.0, int iterations = 100);

/// Five-point central difference of f along each coordinate.
Eigen::VectorXd fd_gradient5(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x, double h);

/// ||a - b|| / max(||a||, ||b||, floor).
double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      double floor = 1e-8);

}  // namespace domainshift::oracles
