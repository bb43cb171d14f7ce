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
#include "domainshift/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace domainshift::testing
{

/// Gaussian features, uniform labels in [0, classes).
inline Batch random_batch(Rng& rng, int n, int features, int classes)
{
    Batch b;
    b.x.resize(n, features);
    for (int i = 0; i < n; ++i)
    {
        for (int f = 0; f < features; ++f)
        {
            b.x(i, f) = rng.normal();
        }
        b.y.push_back(static_cast<int>(rng.below(static_cast<std::size_t>(classes))));
    }
    return b;
}

inline DomainDataset random_dataset(std::uint64_t seed, const std::vector<int>& sizes,
                                    int features, int classes)
{
    Rng rng(seed);
    std::vector<Batch> domains;
    for (int n : sizes)
    {
        domains.push_back(random_batch(rng, n, features, classes));
    }
    return DomainDataset(features, classes, std::move(domains));
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale = 1.0)
{
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        v[i] = scale * rng.normal();
    }
    return v;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c)
{
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
    {
        for (Eigen::Index i = 0; i < r; ++i)
        {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

/// Dense copy of a row-major batch matrix.
inline Eigen::MatrixXd dense(const RowMatrix& x) { return Eigen::MatrixXd(x); }

}  // namespace domainshift::testing
