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

#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace domainshift::oracles
{

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v)
{
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0)
        {
            theta = t;
        }
    }
    return (v.array() - theta).max(0.0).matrix();
}

Eigen::VectorXd simplex_maximize(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x0, int iterations, double floor)
{
    auto feasible = [floor](Eigen::VectorXd x) {
        x = project_simplex(x);
        x = x.array().max(floor).matrix();
        return Eigen::VectorXd(x / x.sum());
    };
    Eigen::VectorXd x = feasible(x0);
    double fx = f(x);
    double step = 1.0;
    for (int it = 0; it < iterations; ++it)
    {
        const Eigen::VectorXd g = grad(x);
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt)
        {
            const Eigen::VectorXd y = feasible(x + step * g);
            const double fy = f(y);
            if (fy >= fx + 1e-4 * g.dot(y - x) && (y - x).norm() > 0.0)
            {
                x = y;
                fx = fy;
                step *= 2.0;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved)
        {
            break;
        }
    }
    return x;
}

namespace
{

Eigen::VectorXd alignment(const Eigen::MatrixXd& grads)
{
    const Eigen::VectorXd total = grads.colwise().sum().transpose();
    Eigen::VectorXd c(grads.rows());
    for (Eigen::Index i = 0; i < grads.rows(); ++i)
    {
        double s = 0.0;
        for (Eigen::Index j = 0; j < grads.cols(); ++j)
        {
            s += grads(i, j) * total[j];
        }
        c[i] = s;
    }
    return c;
}

}  // namespace

double alpha_objective(const Eigen::VectorXd& a, const Eigen::VectorXd& alpha,
                       const Eigen::MatrixXd& grads, double eta)
{
    const Eigen::VectorXd c = alignment(grads);
    double v = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
    {
        v += eta * a[i] * c[i];
        if (a[i] > 0.0)
        {
            v -= a[i] * std::log(a[i] / alpha[i]);
        }
    }
    return v;
}

Eigen::VectorXd alpha_objective_argmax(const Eigen::VectorXd& alpha,
                                       const Eigen::MatrixXd& grads, double eta)
{
    const Eigen::VectorXd c = alignment(grads);
    auto f = [&](const Eigen::VectorXd& a) { return alpha_objective(a, alpha, grads, eta); };
    auto g = [&](const Eigen::VectorXd& a) {
        Eigen::VectorXd out(a.size());
        for (Eigen::Index i = 0; i < a.size(); ++i)
        {
            out[i] = eta * c[i] - std::log(a[i] / alpha[i]) - 1.0;
        }
        return out;
    };
    const Eigen::VectorXd start =
        Eigen::VectorXd::Constant(alpha.size(), 1.0 / static_cast<double>(alpha.size()));
    return simplex_maximize(f, g, start);
}

Eigen::VectorXd alpha_objective_grid(const Eigen::VectorXd& alpha,
                                     const Eigen::MatrixXd& grads, double eta,
                                     int resolution)
{
    Eigen::VectorXd best = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    double best_v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= resolution; ++i)
    {
        for (int j = 0; i + j <= resolution; ++j)
        {
            Eigen::VectorXd a(3);
            a << i, j, resolution - i - j;
            a /= resolution;
            const double v = alpha_objective(a, alpha, grads, eta);
            if (v > best_v)
            {
                best_v = v;
                best = a;
            }
        }
    }
    return best;
}

double decomposition_residual(const Eigen::MatrixXd& W, const Eigen::VectorXd& w_c,
                              const Eigen::MatrixXd& W_s, const Eigen::MatrixXd& Gamma)
{
    double total = 0.0;
    for (Eigen::Index r = 0; r < W.rows(); ++r)
    {
        for (Eigen::Index d = 0; d < W.cols(); ++d)
        {
            double v = W(r, d) - w_c[r];
            for (Eigen::Index j = 0; j < W_s.cols(); ++j)
            {
                v -= W_s(r, j) * Gamma(d, j);
            }
            total += v * v;
        }
    }
    return total;
}

namespace
{

void project_common(Eigen::VectorXd& w_c, const Eigen::MatrixXd& W_s)
{
    if (W_s.cols() == 0)
    {
        return;
    }
    const Eigen::MatrixXd gram =
        W_s.transpose() * W_s +
        1e-14 * Eigen::MatrixXd::Identity(W_s.cols(), W_s.cols());
    const Eigen::VectorXd coef = gram.ldlt().solve(W_s.transpose() * w_c);
    w_c -= W_s * coef;
}

}  // namespace

double decomposition_min(const Eigen::MatrixXd& W, int k, int restarts,
                         int iterations, std::uint64_t seed)
{
    const Eigen::Index m = W.rows();
    const Eigen::Index D = W.cols();
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = W.norm() / std::sqrt(static_cast<double>(m * D)) + 1e-12;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r)
    {
        Eigen::VectorXd w_c(m);
        Eigen::MatrixXd W_s(m, k);
        Eigen::MatrixXd G(D, k);
        for (Eigen::Index i = 0; i < m; ++i) w_c[i] = scale * normal(gen);
        for (Eigen::Index i = 0; i < W_s.size(); ++i) W_s.data()[i] = scale * normal(gen);
        for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = normal(gen);
        project_common(w_c, W_s);
        double f = decomposition_residual(W, w_c, W_s, G);
        double step = 0.1;
        for (int it = 0; it < iterations; ++it)
        {
            const Eigen::MatrixXd R = W - w_c * Eigen::RowVectorXd::Ones(D) - W_s * G.transpose();
            const Eigen::VectorXd gw = -2.0 * R.rowwise().sum();
            const Eigen::MatrixXd gs = -2.0 * R * G;
            const Eigen::MatrixXd gg = -2.0 * R.transpose() * W_s;
            bool moved = false;
            for (int bt = 0; bt < 50; ++bt)
            {
                Eigen::VectorXd nw = w_c - step * gw;
                Eigen::MatrixXd ns = W_s - step * gs;
                Eigen::MatrixXd ng = G - step * gg;
                project_common(nw, ns);
                const double nf = decomposition_residual(W, nw, ns, ng);
                if (nf < f)
                {
                    w_c = std::move(nw);
                    W_s = std::move(ns);
                    G = std::move(ng);
                    f = nf;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved)
            {
                break;
            }
        }
        best = std::min(best, f);
    }
    return best;
}

namespace
{

double log1pexp(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z)
{
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

double logistic_loss(const Eigen::MatrixXd& X, const std::vector<int>& y,
                     const Eigen::VectorXd& w, double b)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
    {
        double z = b;
        for (Eigen::Index j = 0; j < X.cols(); ++j)
        {
            z += w[j] * X(i, j);
        }
        // -log sigmoid(z) for y = 1, -log(1 - sigmoid(z)) for y = 0.
        total += y[static_cast<std::size_t>(i)] == 1 ? log1pexp(-z) : log1pexp(z);
    }
    return total;
}

Eigen::VectorXd logistic_grad(const Eigen::MatrixXd& X, const std::vector<int>& y,
                              const Eigen::VectorXd& w, double b)
{
    Eigen::VectorXd g = Eigen::VectorXd::Zero(X.cols() + 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
    {
        double z = b;
        for (Eigen::Index j = 0; j < X.cols(); ++j)
        {
            z += w[j] * X(i, j);
        }
        const double r = sigmoid(z) - y[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < X.cols(); ++j)
        {
            g[j] += r * X(i, j);
        }
        g[X.cols()] += r;
    }
    return g;
}

double softmax_loss(const Eigen::MatrixXd& X, const std::vector<int>& y,
                    const Eigen::MatrixXd& W, const Eigen::VectorXd& b)
{
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
    {
        std::vector<double> z(static_cast<std::size_t>(W.rows()));
        double zmax = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < W.rows(); ++c)
        {
            double v = b[c];
            for (Eigen::Index j = 0; j < X.cols(); ++j)
            {
                v += W(c, j) * X(i, j);
            }
            z[static_cast<std::size_t>(c)] = v;
            zmax = std::max(zmax, v);
        }
        double s = 0.0;
        for (double v : z)
        {
            s += std::exp(v - zmax);
        }
        total += zmax + std::log(s) - z[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])];
    }
    return total;
}

Eigen::VectorXd logistic_fit(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             double ridge, int iterations)
{
    const Eigen::Index p = X.cols() + 1;
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    auto objective = [&](const Eigen::VectorXd& t) {
        return logistic_loss(X, y, t.head(p - 1), t[p - 1]) / n +
               0.5 * ridge * t.head(p - 1).squaredNorm();
    };
    for (int it = 0; it < iterations; ++it)
    {
        Eigen::VectorXd g = logistic_grad(X, y, theta.head(p - 1), theta[p - 1]) / n;
        g.head(p - 1) += ridge * theta.head(p - 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
        {
            Eigen::VectorXd xt(p);
            xt.head(p - 1) = X.row(i).transpose();
            xt[p - 1] = 1.0;
            const double s = sigmoid(xt.dot(theta));
            H += s * (1.0 - s) * xt * xt.transpose();
        }
        H /= n;
        H.topLeftCorner(p - 1, p - 1).diagonal().array() += ridge;
        const Eigen::VectorXd dir = H.ldlt().solve(g);
        double t = 1.0;
        const double f0 = objective(theta);
        while (t > 1e-12 && objective(theta - t * dir) > f0 - 1e-4 * t * g.dot(dir))
        {
            t *= 0.5;
        }
        theta -= t * dir;
        if (g.norm() < 1e-14)
        {
            break;
        }
    }
    return theta;
}

Eigen::VectorXd fd_gradient5(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x, double h)
{
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i)
    {
        const double xi = x[i];
        y[i] = xi + 2 * h;
        const double f2p = f(y);
        y[i] = xi + h;
        const double f1p = f(y);
        y[i] = xi - h;
        const double f1m = f(y);
        y[i] = xi - 2 * h;
        const double f2m = f(y);
        y[i] = xi;
        g[i] = (-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h);
    }
    return g;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor)
{
    return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

}  // namespace domainshift::oracles
