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

#include "domainshift/harness/metrics.hpp"

#include "domainshift/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace domainshift
{

WorstMacro worst_and_macro(std::span<const double> per_domain_losses)
{
    if (per_domain_losses.empty())
    {
        throw ConfigError("worst_and_macro needs at least one domain");
    }
    WorstMacro out;
    out.worst = *std::max_element(per_domain_losses.begin(), per_domain_losses.end());
    out.macro = std::accumulate(per_domain_losses.begin(), per_domain_losses.end(), 0.0) /
                static_cast<double>(per_domain_losses.size());
    return out;
}

double worst_accuracy(std::span<const double> per_domain_accuracy)
{
    if (per_domain_accuracy.empty())
    {
        throw ConfigError("worst_accuracy needs at least one domain");
    }
    return *std::min_element(per_domain_accuracy.begin(), per_domain_accuracy.end());
}

double solution_variance(std::span<const Eigen::VectorXd> params_per_seed)
{
    const std::size_t n = params_per_seed.size();
    if (n < 2)
    {
        throw ConfigError("solution_variance needs at least two seeds");
    }
    const Eigen::Index dim = params_per_seed[0].size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    std::vector<Eigen::VectorXd> normalized;
    normalized.reserve(n);
    for (std::size_t s = 0; s < n; ++s)
    {
        const Eigen::VectorXd& v = params_per_seed[s];
        if (v.size() != dim)
        {
            throw ConfigError("solution_variance: solutions differ in length");
        }
        const double inf = dim == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
        if (!(inf > 0.0))
        {
            throw DegenerateInputError(
                fmt::format("solution of seed index {} is the zero vector", s));
        }
        normalized.push_back(v / inf);
        mean += normalized.back();
    }
    mean /= static_cast<double>(n);
    double total = 0.0;
    for (const auto& v : normalized)
    {
        total += (v - mean).squaredNorm();
    }
    return total / static_cast<double>(n - 1);
}

MeanStd mean_std(std::span<const double> values)
{
    if (values.empty())
    {
        throw ConfigError("mean_std of an empty sample");
    }
    const double n = static_cast<double>(values.size());
    MeanStd out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1)
    {
        double ss = 0.0;
        for (double v : values)
        {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.std = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

MetricsReport build_report(std::string task, std::string algorithm,
                           std::vector<SeedRun> runs)
{
    if (runs.empty())
    {
        throw ConfigError("build_report needs at least one run");
    }
    MetricsReport r;
    r.task = std::move(task);
    r.algorithm = std::move(algorithm);
    r.runs = std::move(runs);
    const std::size_t domains = r.runs[0].test.loss.size();
    r.test_loss.assign(domains, 0.0);
    r.test_accuracy.assign(domains, 0.0);
    std::vector<double> worst, macro, worst_acc, avg_acc, train_macro;
    std::vector<Eigen::VectorXd> thetas;
    for (const SeedRun& run : r.runs)
    {
        if (run.test.loss.size() != domains || run.test.accuracy.size() != domains)
        {
            throw ConfigError("build_report: runs differ in domain count");
        }
        for (std::size_t d = 0; d < domains; ++d)
        {
            r.test_loss[d] += run.test.loss[d];
            r.test_accuracy[d] += run.test.accuracy[d];
        }
        const WorstMacro wm = worst_and_macro(run.test.loss);
        worst.push_back(wm.worst);
        macro.push_back(wm.macro);
        worst_acc.push_back(worst_accuracy(run.test.accuracy));
        avg_acc.push_back(
            std::accumulate(run.test.accuracy.begin(), run.test.accuracy.end(), 0.0) /
            static_cast<double>(domains));
        train_macro.push_back(worst_and_macro(run.train.loss).macro);
        thetas.push_back(run.theta);
    }
    const double n = static_cast<double>(r.runs.size());
    for (std::size_t d = 0; d < domains; ++d)
    {
        r.test_loss[d] /= n;
        r.test_accuracy[d] /= n;
    }
    r.worst_domain_loss = mean_std(worst);
    r.macro_loss = mean_std(macro);
    r.worst_accuracy = mean_std(worst_acc);
    r.average_accuracy = mean_std(avg_acc);
    r.train_macro_loss = mean_std(train_macro);
    r.solution_variance = r.runs.size() >= 2
                              ? solution_variance(thetas)
                              : std::numeric_limits<double>::quiet_NaN();
    return r;
}

std::vector<MetricRow> report_rows(const MetricsReport& report)
{
    std::vector<MetricRow> rows;
    const std::string base = fmt::format("{}/{}", report.task, report.algorithm);
    auto add = [&](const std::string& run_id, const std::string& seed,
                   const std::string& domain, const char* split, const char* metric,
                   double value) {
        rows.push_back({run_id, seed, report.task, report.algorithm, domain, split,
                        metric, value});
    };
    for (const SeedRun& run : report.runs)
    {
        const std::string seed = std::to_string(run.seed);
        const std::string id = fmt::format("{}/{}", base, seed);
        for (const auto& [split, m] :
             {std::pair<const char*, const DomainMetrics*>{"train", &run.train},
              {"test", &run.test}})
        {
            for (std::size_t d = 0; d < m->loss.size(); ++d)
            {
                add(id, seed, std::to_string(d), split, "loss", m->loss[d]);
                add(id, seed, std::to_string(d), split, "accuracy", m->accuracy[d]);
            }
            const WorstMacro wm = worst_and_macro(m->loss);
            add(id, seed, "all", split, "worst_loss", wm.worst);
            add(id, seed, "all", split, "macro_loss", wm.macro);
            add(id, seed, "all", split, "worst_accuracy", worst_accuracy(m->accuracy));
        }
    }
    for (std::size_t d = 0; d < report.test_loss.size(); ++d)
    {
        add(base, "all", std::to_string(d), "test", "mean_loss", report.test_loss[d]);
        add(base, "all", std::to_string(d), "test", "mean_accuracy",
            report.test_accuracy[d]);
    }
    const std::pair<const char*, MeanStd> stats[] = {
        {"worst_loss", report.worst_domain_loss},
        {"macro_loss", report.macro_loss},
        {"worst_accuracy", report.worst_accuracy},
        {"average_accuracy", report.average_accuracy},
    };
    for (const auto& [name, ms] : stats)
    {
        add(base, "all", "all", "test", fmt::format("{}_mean", name).c_str(), ms.mean);
        add(base, "all", "all", "test", fmt::format("{}_std", name).c_str(), ms.std);
    }
    add(base, "all", "all", "train", "macro_loss_mean", report.train_macro_loss.mean);
    add(base, "all", "all", "train", "macro_loss_std", report.train_macro_loss.std);
    if (!std::isnan(report.solution_variance))
    {
        add(base, "all", "all", "train", "solution_variance", report.solution_variance);
    }
    return rows;
}

}  // namespace domainshift
