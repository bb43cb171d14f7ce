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

#include "domainshift/synth/synth.hpp"

#include "domainshift/error.hpp"
#include "domainshift/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <string>

namespace domainshift
{

std::string_view to_string(TaskKind kind) noexcept
{
    switch (kind)
    {
        case TaskKind::kDgExample:
            return "dg-example";
        case TaskKind::kNoiseSimple:
            return "noise-simple";
        case TaskKind::kRotationSimple:
            return "rotation-simple";
        case TaskKind::kSpuriousSimple:
            return "spurious-simple";
    }
    return "unknown";
}

TaskKind parse_task(std::string_view name)
{
    for (TaskKind k : {TaskKind::kDgExample, TaskKind::kNoiseSimple,
                       TaskKind::kRotationSimple, TaskKind::kSpuriousSimple})
    {
        if (to_string(k) == name)
        {
            return k;
        }
    }
    throw ConfigError(fmt::format("unknown task '{}'", name));
}

namespace
{

// Stream tags: one child stream per split and per domain.
constexpr std::uint64_t kTrainTag = 1;
constexpr std::uint64_t kTestTag = 2;

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

std::size_t exact_count(double rate, std::size_t n)
{
    return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

RowMatrix normals(Rng& rng, int rows, int cols)
{
    RowMatrix x(rows, cols);
    for (int i = 0; i < rows; ++i)
    {
        for (int j = 0; j < cols; ++j)
        {
            x(i, j) = rng.normal();
        }
    }
    return x;
}

std::vector<int> default_sizes(TaskKind kind)
{
    switch (kind)
    {
        case TaskKind::kNoiseSimple:
            return {450, 450, 100};
        case TaskKind::kRotationSimple:
            return {499, 499, 2};
        case TaskKind::kSpuriousSimple:
            return {490, 490, 20};
        case TaskKind::kDgExample:
            return {500, 500};
    }
    return {};
}

std::vector<int> filled(int k, int n) { return std::vector<int>(static_cast<std::size_t>(k), n); }

}  // namespace

void DgSpec::validate() const
{
    const auto D = static_cast<std::size_t>(beta.rows());
    if (D == 0 || sigma.size() != D || n.size() != D)
    {
        throw ConfigError("dg spec needs beta, sigma and n for every domain");
    }
    if (e_c.size() != E_s.rows() || beta.cols() != E_s.cols())
    {
        throw ConfigError("dg spec: e_c, E_s and beta shapes disagree");
    }
    for (std::size_t d = 0; d < D; ++d)
    {
        if (n[d] < 1 || !(sigma[d] >= 0.0))
        {
            throw ConfigError("dg spec: sizes must be positive, sigma >= 0");
        }
    }
}

DomainDataset gen_dg_example(const DgSpec& spec, std::uint64_t seed)
{
    spec.validate();
    const Rng root(seed);
    const auto m = static_cast<int>(spec.e_c.size());
    std::vector<Batch> domains;
    for (Eigen::Index d = 0; d < spec.beta.rows(); ++d)
    {
        Rng rng = root.split(static_cast<std::uint64_t>(d));
        const auto i = static_cast<std::size_t>(d);
        const double scale =
            spec.noise_is_std ? spec.sigma[i] : std::sqrt(spec.sigma[i]);
        const Eigen::VectorXd mean =
            spec.e_c + spec.E_s * spec.beta.row(d).transpose();
        Batch b;
        b.x.resize(spec.n[i], m);
        for (int r = 0; r < spec.n[i]; ++r)
        {
            const double y = rng.uniform() < 0.5 ? -1.0 : 1.0;
            for (int j = 0; j < m; ++j)
            {
                b.x(r, j) = y * mean[j] + scale * rng.normal();
            }
            b.y.push_back(y > 0.0 ? 1 : 0);
        }
        domains.push_back(std::move(b));
    }
    DomainDataset out(m, 2, std::move(domains));
    out.validate();
    return out;
}

void SynthTask::validate() const
{
    if (!in_unit(flip_rate) || !in_unit(corruption_rate) ||
        !in_unit(spurious_agreement))
    {
        throw ConfigError("synthetic task rates must lie in [0, 1]");
    }
    if (test_size < 1)
    {
        throw ConfigError("test_size must be positive");
    }
    for (int n : train_sizes())
    {
        if (n < 1)
        {
            throw ConfigError("domain sizes must be positive");
        }
    }
    if (kind == TaskKind::kDgExample)
    {
        if (beta.size() != sigma.size() || dg_train_domains < 1 ||
            static_cast<std::size_t>(dg_train_domains) > beta.size())
        {
            throw ConfigError("dg-example needs matching beta/sigma lists "
                              "covering the training domains");
        }
        if (train_sizes().size() != static_cast<std::size_t>(dg_train_domains))
        {
            throw ConfigError("dg-example needs one size per training domain");
        }
    }
    else if (train_sizes().size() != 3)
    {
        throw ConfigError("toy tasks have exactly three domains");
    }
}

std::vector<int> SynthTask::train_sizes() const
{
    return sizes.empty() ? default_sizes(kind) : sizes;
}

TaskData gen_noise_simple(const SynthTask& task)
{
    task.validate();
    const Rng root(task.seed);
    auto split = [&](std::uint64_t tag, const std::vector<int>& n, bool noisy) {
        const Rng parent = root.split(tag);
        std::vector<Batch> domains;
        for (std::size_t d = 0; d < n.size(); ++d)
        {
            Rng rng = parent.split(d);
            Batch b{normals(rng, n[d], 2), {}};
            for (int i = 0; i < n[d]; ++i)
            {
                b.y.push_back(b.x(i, 0) + b.x(i, 1) > 0.0 ? 1 : 0);
            }
            if (d == 0 && noisy)
            {
                const auto size = static_cast<std::size_t>(n[d]);
                for (std::size_t i :
                     rng.sample_without_replacement(size, exact_count(task.flip_rate, size)))
                {
                    b.y[i] = 1 - b.y[i];
                }
            }
            domains.push_back(std::move(b));
        }
        return DomainDataset(2, 2, std::move(domains),
                             {"Noisy-Majority", "Clean-Majority", "Clean-Minority"});
    };
    return {split(kTrainTag, task.train_sizes(), true),
            split(kTestTag, filled(3, task.test_size), task.noisy_test)};
}

TaskData gen_rotation_simple(const SynthTask& task)
{
    task.validate();
    const Rng root(task.seed);
    auto split = [&](std::uint64_t tag, const std::vector<int>& n) {
        const Rng parent = root.split(tag);
        std::vector<Batch> domains;
        for (std::size_t d = 0; d < n.size(); ++d)
        {
            Rng rng = parent.split(d);
            Batch b{normals(rng, n[d], 2), {}};
            for (int i = 0; i < n[d]; ++i)
            {
                const double s = kRotationWeights[d][0] * b.x(i, 0) +
                                 kRotationWeights[d][1] * b.x(i, 1);
                b.y.push_back(s > 0.0 ? 1 : 0);
            }
            domains.push_back(std::move(b));
        }
        return DomainDataset(2, 2, std::move(domains),
                             {"Rotated-0", "Rotated-30", "Rotated-60"});
    };
    return {split(kTrainTag, task.train_sizes()),
            split(kTestTag, filled(3, task.test_size))};
}

TaskData gen_spurious_simple(const SynthTask& task)
{
    task.validate();
    const Rng root(task.seed);
    auto split = [&](std::uint64_t tag, const std::vector<int>& n, bool corrupt) {
        const Rng parent = root.split(tag);
        std::vector<Batch> domains;
        for (std::size_t d = 0; d < n.size(); ++d)
        {
            Rng rng = parent.split(d);
            const auto size = static_cast<std::size_t>(n[d]);
            const RowMatrix base = normals(rng, n[d], 2);
            Batch b;
            b.x.resize(n[d], 3);
            b.x.leftCols(2) = base;
            for (int i = 0; i < n[d]; ++i)
            {
                b.y.push_back(base(i, 0) + base(i, 1) > 0.0 ? 1 : 0);
            }
            std::vector<bool> agree(size, d == 0);
            if (d == 0 && corrupt)
            {
                for (std::size_t i : rng.sample_without_replacement(
                         size, exact_count(task.corruption_rate, size)))
                {
                    b.x.row(static_cast<Eigen::Index>(i)).head(2) *= -1.0;
                }
            }
            if (d == 1)
            {
                for (std::size_t i : rng.sample_without_replacement(
                         size, exact_count(task.spurious_agreement, size)))
                {
                    agree[i] = true;
                }
            }
            for (std::size_t i = 0; i < size; ++i)
            {
                b.x(static_cast<Eigen::Index>(i), 2) =
                    agree[i] ? b.y[i] : 1 - b.y[i];
            }
            domains.push_back(std::move(b));
        }
        return DomainDataset(3, 2, std::move(domains),
                             {"Corrupted-Majority", "Spurious-Majority",
                              "Reversed-Minority"});
    };
    return {split(kTrainTag, task.train_sizes(), true),
            split(kTestTag, filled(3, task.test_size), task.corrupt_test)};
}

TaskData gen_dg_task(const SynthTask& task)
{
    task.validate();
    const Rng root(task.seed);
    auto spec_for = [&](std::size_t domains, const std::vector<int>& n) {
        DgSpec spec;
        spec.beta.resize(static_cast<Eigen::Index>(domains), 1);
        for (std::size_t d = 0; d < domains; ++d)
        {
            spec.beta(static_cast<Eigen::Index>(d), 0) = task.beta[d];
            spec.sigma.push_back(task.sigma[d]);
        }
        spec.n = n;
        spec.noise_is_std = task.noise_is_std;
        return spec;
    };
    const auto train_domains = static_cast<std::size_t>(task.dg_train_domains);
    const std::size_t all = task.beta.size();
    return {gen_dg_example(spec_for(train_domains, task.train_sizes()),
                           root.split(kTrainTag).next_u64()),
            gen_dg_example(spec_for(all, filled(static_cast<int>(all), task.test_size)),
                           root.split(kTestTag).next_u64())};
}

TaskData make_task(const SynthTask& task)
{
    switch (task.kind)
    {
        case TaskKind::kDgExample:
            return gen_dg_task(task);
        case TaskKind::kNoiseSimple:
            return gen_noise_simple(task);
        case TaskKind::kRotationSimple:
            return gen_rotation_simple(task);
        case TaskKind::kSpuriousSimple:
            return gen_spurious_simple(task);
    }
    throw ConfigError("unknown task kind");
}

void write_dataset_csv(std::ostream& out, const DomainDataset& data)
{
    for (int j = 0; j < data.features(); ++j)
    {
        out << 'x' << (j + 1) << ',';
    }
    out << "y,d\n";
    for (int d = 0; d < data.num_domains(); ++d)
    {
        const Batch& b = data.domain(d);
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            for (int j = 0; j < data.features(); ++j)
            {
                out << fmt::format("{},", b.x(static_cast<Eigen::Index>(i), j));
            }
            out << b.y[i] << ',' << d << '\n';
        }
    }
}

}  // namespace domainshift
