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

#include "domainshift/model/dataset.hpp"

#include "domainshift/error.hpp"

#include <fmt/format.h>

namespace domainshift
{

Batch Batch::subset(std::span<const std::size_t> rows) const
{
    Batch out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    out.y.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        out.x.row(static_cast<Eigen::Index>(i)) =
            x.row(static_cast<Eigen::Index>(rows[i]));
        out.y.push_back(y[rows[i]]);
    }
    return out;
}

DomainDataset::DomainDataset(int features, int classes,
                             std::vector<Batch> domains,
                             std::vector<std::string> names)
    : features_(features),
      classes_(classes),
      domains_(std::move(domains)),
      names_(std::move(names))
{
    if (names_.empty())
    {
        for (std::size_t i = 0; i < domains_.size(); ++i)
        {
            names_.push_back(fmt::format("domain{}", i));
        }
    }
    if (names_.size() != domains_.size())
    {
        throw ConfigError("DomainDataset: one name per domain required");
    }
}

DomainDataset DomainDataset::from_examples(std::span<const Example> examples,
                                           int features, int classes,
                                           int domains)
{
    std::vector<std::vector<const Example*>> grouped(
        static_cast<std::size_t>(domains));
    for (const auto& ex : examples)
    {
        if (ex.d < 0 || ex.d >= domains)
        {
            throw ConfigError(fmt::format(
                "example domain {} outside [0, {})", ex.d, domains));
        }
        if (ex.x.size() != features)
        {
            throw ConfigError(fmt::format(
                "example has {} features, expected {}", ex.x.size(), features));
        }
        grouped[static_cast<std::size_t>(ex.d)].push_back(&ex);
    }
    std::vector<Batch> batches;
    for (const auto& group : grouped)
    {
        Batch b;
        b.x.resize(static_cast<Eigen::Index>(group.size()), features);
        for (std::size_t i = 0; i < group.size(); ++i)
        {
            b.x.row(static_cast<Eigen::Index>(i)) = group[i]->x.transpose();
            b.y.push_back(group[i]->y);
        }
        batches.push_back(std::move(b));
    }
    DomainDataset out(features, classes, std::move(batches));
    out.validate();
    return out;
}

std::vector<int> DomainDataset::sizes() const
{
    std::vector<int> n;
    n.reserve(domains_.size());
    for (const auto& d : domains_)
    {
        n.push_back(static_cast<int>(d.size()));
    }
    return n;
}

std::size_t DomainDataset::total() const
{
    std::size_t n = 0;
    for (const auto& d : domains_)
    {
        n += d.size();
    }
    return n;
}

Batch DomainDataset::pooled() const
{
    Batch out;
    out.x.resize(static_cast<Eigen::Index>(total()), features_);
    Eigen::Index row = 0;
    for (const auto& d : domains_)
    {
        out.x.middleRows(row, static_cast<Eigen::Index>(d.size())) = d.x;
        row += static_cast<Eigen::Index>(d.size());
        out.y.insert(out.y.end(), d.y.begin(), d.y.end());
    }
    return out;
}

std::vector<Example> DomainDataset::examples() const
{
    std::vector<Example> out;
    out.reserve(total());
    for (int d = 0; d < num_domains(); ++d)
    {
        const auto& b = domain(d);
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            out.push_back(
                {b.x.row(static_cast<Eigen::Index>(i)).transpose(), b.y[i], d});
        }
    }
    return out;
}

void DomainDataset::validate() const
{
    if (features_ <= 0 || classes_ < 2)
    {
        throw ConfigError(fmt::format(
            "dataset needs features > 0 and classes >= 2 (got {}, {})",
            features_, classes_));
    }
    if (domains_.empty())
    {
        throw DataError("dataset has no domains");
    }
    for (std::size_t i = 0; i < domains_.size(); ++i)
    {
        const auto& d = domains_[i];
        if (d.empty())
        {
            throw DataError(fmt::format("domain {} ('{}') is empty", i, names_[i]));
        }
        if (d.x.cols() != features_ ||
            d.x.rows() != static_cast<Eigen::Index>(d.y.size()))
        {
            throw ConfigError(fmt::format("domain {} has inconsistent shape", i));
        }
        for (int label : d.y)
        {
            if (label < 0 || label >= classes_)
            {
                throw ConfigError(fmt::format(
                    "domain {} has label {} outside [0, {})", i, label, classes_));
            }
        }
    }
}

DomainDataset DomainDataset::permuted(std::span<const int> perm) const
{
    if (perm.size() != domains_.size())
    {
        throw ConfigError("permutation size must equal the number of domains");
    }
    std::vector<Batch> batches;
    std::vector<std::string> names;
    for (int p : perm)
    {
        batches.push_back(domain(p));
        names.push_back(name(p));
    }
    return DomainDataset(features_, classes_, std::move(batches), std::move(names));
}

}  // namespace domainshift
