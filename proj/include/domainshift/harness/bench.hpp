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

#include "domainshift/harness/csv.hpp"
#include "domainshift/harness/metrics.hpp"
#include "domainshift/reweighting/reweighting.hpp"
#include "domainshift/reweighting/train.hpp"
#include "domainshift/synth/synth.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace domainshift
{

/// One pass/fail line of a benchmark summary.
struct Check
{
    std::string name;
    bool passed = false;
    double value = 0.0;
    /// Accepted interval; NaN bounds are open.
    double lo = 0.0;
    double hi = 0.0;
    /// Reference value and provenance, printed alongside the result.
    std::string reference;
};

/// "PASS name value [lo, hi] reference" (or FAIL).
std::string format_check(const Check& c);
bool all_passed(const std::vector<Check>& checks);

struct BenchOptions
{
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5};
    int threads = 1;
    /// Multiplies every tolerance band half-width.
    double tolerance_scale = 1.0;
    Exec exec = Exec::kParallel;
};

/// A reference mean (std) for one task / algorithm pair.
struct ReferenceValue
{
    TaskKind task;
    Algorithm algorithm;
    double mean;
    double std;
};

/// Worst-domain test BCE, linear model, 6 seeds.
extern const std::vector<ReferenceValue> kReferenceWorstLoss;
/// Macro train loss, linear model, 6 seeds.
extern const std::vector<ReferenceValue> kReferenceTrainLoss;
/// Variance of the L-infinity normalized solution (std field unused).
extern const std::vector<ReferenceValue> kReferenceVariance;
/// Half-width of the train-loss band.
inline constexpr double kTrainLossTolerance = 0.10;

struct ToyTableResult
{
    /// Task-major, then ERM, Group-DRO, CGD.
    std::vector<MetricsReport> cells;
    std::vector<Check> checks;

    const MetricsReport& cell(TaskKind task, Algorithm algorithm) const;
};

/// Linear model, reference-class head, 400 full-batch epochs at lr 0.1 on
/// the three toy tasks for ERM, Group-DRO and CGD. Checks: worst loss within
/// mean +- 2 std, train loss within +- 0.10, and CGD below Group-DRO in worst
/// loss and solution variance on every task. Rows go to `csv` when given.
ToyTableResult run_toy_table(const BenchOptions& opt, CsvWriter* csv = nullptr);

/// Three-domain logistic instance with noisy labels (40 examples each, two
/// features plus bias).
DomainDataset convergence_instance(std::uint64_t seed);

struct ConvergenceResult
{
    ConvergenceBudget budget;
    StepSizes steps;
    /// First iteration with ||grad R|| < epsilon, or -1.
    long long hit_iteration = -1;
    long long iterations_run = 0;
    double initial_grad_norm = 0.0;
    double final_grad_norm = 0.0;
    /// Largest one-step increase of R observed.
    double max_risk_increase = 0.0;
    std::vector<Check> checks;
};

/// Inner-product CGD with the step sizes of the convergence bound. B = ln 2
/// (R at zero), L = max_i smoothness of l_i, G = max_i mean ||x~||. Runs
/// until ||grad R|| < epsilon or T iterations, checking that R never rises
/// by more than 1e-9 in one step.
ConvergenceResult run_convergence(std::uint64_t seed = 0, double epsilon = 0.05,
                                  CsvWriter* csv = nullptr);

/// Best objective found by an independent minimizer of
/// ||W - w_c 1^T - W_s Gamma^T||^2 subject to w_c orthogonal to span(W_s).
using DecompositionOracle = std::function<double(const Eigen::MatrixXd& W, int k)>;

struct DecompositionResult
{
    int instances = 0;
    double max_mean_error = 0.0;
    double max_pinv_error = 0.0;
    double max_orthogonality = 0.0;
    double max_oracle_gap = 0.0;
    /// (W, k) pairs with rank(W) < k + 1; excluded from the orthogonality
    /// and oracle comparisons.
    int deficient_cases = 0;
    /// Pairs whose non_unique flag disagrees with the rank condition.
    int flag_mismatches = 0;
    std::vector<Check> checks;
};

/// 100 random W (m, D in [2, 8]): k = 0 against the row mean (1e-10),
/// k = D - 1 against the pseudoinverse form (1e-8), intermediate k against
/// `oracle` when given (objective <= oracle + 1e-6), plus the two worked
/// three-domain examples. Orthogonality and the oracle comparison apply to
/// pairs with rank(W) >= k + 1; the others must be flagged non-unique.
DecompositionResult run_decomposition(std::uint64_t seed = 0,
                                      const DecompositionOracle& oracle = {},
                                      CsvWriter* csv = nullptr);

/// The worked examples: columns [1,1,-0.5], [1,1,1], [1,1,1], and the same
/// bank with the first classifier scaled by 2.
Eigen::MatrixXd ideal_example_bank();
Eigen::MatrixXd practice_example_bank();

/// ||P_A - P_B||_F for the column spaces of A and B.
double projector_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Runs every seed of `cfg` and aggregates the test metrics.
struct ExperimentConfig;
MetricsReport run_experiment(const ExperimentConfig& cfg, CsvWriter* csv = nullptr);

}  // namespace domainshift
