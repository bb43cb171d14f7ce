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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace domainshift::checks
{

/// One acceptance criterion: a single pass/fail line plus its evidence.
struct CriterionResult
{
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// "PASS [n] name: detail" (or FAIL).
std::string format_criterion(const CriterionResult& r);

struct AcceptanceOptions
{
    /// Seeds of the toy-table and equivalence runs.
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};
    /// Seeds of the dg-example comparison.
    std::vector<std::uint64_t> dg_seeds = {0, 1, 2, 3, 4};
    int threads = 1;
    double tolerance_scale = 1.0;
    /// Random cases per gradient family.
    int gradient_cases = 50;
    /// Random instances of the weight-update property.
    int mirror_instances = 1000;
};

/// Runs every criterion in order, calling `report` as each one finishes.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& report = {});

/// Individual criteria, exposed for targeted runs.
CriterionResult mirror_descent_property(int instances, std::uint64_t seed = 0);
CriterionResult gradient_correctness(int cases, std::uint64_t seed = 0);
CriterionResult degenerate_reductions(const std::vector<std::uint64_t>& seeds,
                                      int threads);
CriterionResult dg_example_directional(const std::vector<std::uint64_t>& seeds,
                                       int threads);

}  // namespace domainshift::checks
