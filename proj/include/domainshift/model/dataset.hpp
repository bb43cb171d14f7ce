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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace domainshift
{

/// Row-major so that each example's features are contiguous.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Example
{
    Eigen::VectorXd x;
    int y = 0;
    int d = 0;
};

/// Examples of one domain (or an arbitrary batch): one row per example.
struct Batch
{
    RowMatrix x;
    std::vector<int> y;

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }

    /// Rows selected by `rows`, in that order.
    Batch subset(std::span<const std::size_t> rows) const;
};

/// Labeled examples grouped into k demarcated domains.
///
/// Invariants (checked by validate()): every domain non-empty, labels in
/// [0, classes), feature count equal to `features` everywhere.
class DomainDataset
{
public:
    DomainDataset() = default;
    DomainDataset(int features, int classes, std::vector<Batch> domains,
                  std::vector<std::string> names = {});

    /// Groups examples by their `d` field; domains are [0, domains).
    static DomainDataset from_examples(std::span<const Example> examples,
                                       int features, int classes,
                                       int domains);

    int features() const noexcept { return features_; }
    int classes() const noexcept { return classes_; }
    int num_domains() const noexcept { return static_cast<int>(domains_.size()); }

    const Batch& domain(int i) const { return domains_.at(static_cast<std::size_t>(i)); }
    const std::vector<Batch>& domains() const noexcept { return domains_; }
    const std::string& name(int i) const { return names_.at(static_cast<std::size_t>(i)); }

    /// Per-domain sizes n_i.
    std::vector<int> sizes() const;
    std::size_t total() const;

    /// All examples concatenated in domain order.
    Batch pooled() const;

    /// Flat list of examples with their domain index.
    std::vector<Example> examples() const;

    /// Throws DataError / ConfigError if an invariant is violated.
    void validate() const;

    /// Same dataset with domains reordered: result domain j = this domain perm[j].
    DomainDataset permuted(std::span<const int> perm) const;

private:
    int features_ = 0;
    int classes_ = 0;
    std::vector<Batch> domains_;
    std::vector<std::string> names_;
};

}  // namespace domainshift
