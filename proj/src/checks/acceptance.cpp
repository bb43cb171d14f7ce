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

#include "checks/acceptance.hpp"

#include "domainshift/crossgrad/crossgrad.hpp"
#include "domainshift/csd/csd_train.hpp"
#include "domainshift/harness/bench.hpp"
#include "domainshift/harness/executor.hpp"
#include "domainshift/reweighting/reweighting.hpp"
#include "domainshift/reweighting/train.hpp"
#include "domainshift/rng.hpp"
#include "domainshift/synth/synth.hpp"
#include "oracles/oracles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace domainshift::checks
{

namespace
{

constexpr double kFdStep = 1e-4;
constexpr double kGradTolerance = 1e-5;

/// Folds benchmark checks whose names start with `prefix` into one criterion.
CriterionResult fold(int id, std::string name, const std::vector<Check>& checks,
                     const std::vector<std::string>& prefixes)
{
    CriterionResult r{id, std::move(name), true, ""};
    int total = 0;
    std::vector<std::string> failing;
    for (const Check& c : checks)
    {
        const bool match = std::any_of(prefixes.begin(), prefixes.end(), [&](const auto& p) {
            return c.name.rfind(p, 0) == 0;
        });
        if (!match)
        {
            continue;
        }
        ++total;
        if (!c.passed)
        {
            r.passed = false;
            failing.push_back(format_check(c));
        }
    }
    if (total == 0)
    {
        r.passed = false;
    }
    r.detail = fmt::format("{}/{} checks pass", total - static_cast<int>(failing.size()),
                           total);
    for (const auto& f : failing)
    {
        r.detail += "; " + f;
    }
    return r;
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale)
{
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        v[i] = scale * rng.normal();
    }
    return v;
}

RowMatrix random_rows(Rng& rng, Eigen::Index n, Eigen::Index m)
{
    RowMatrix x(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < m; ++j)
        {
            x(i, j) = rng.normal();
        }
    }
    return x;
}

Architecture random_arch(Rng& rng, int inputs, int classes)
{
    const Head head = classes == 2 && rng.below(2) == 0 ? Head::kReferenceClass
                                                       : Head::kSoftmax;
    std::vector<int> hidden;
    const std::size_t layers = rng.below(3);
    for (std::size_t l = 0; l < layers; ++l)
    {
        hidden.push_back(2 + static_cast<int>(rng.below(3)));
    }
    return Architecture::mlp(inputs, hidden, classes, head);
}

DomainDataset random_dataset(Rng& rng, int domains, int features, int classes)
{
    std::vector<Batch> batches;
    for (int d = 0; d < domains; ++d)
    {
        const auto n = static_cast<Eigen::Index>(2 + rng.below(6));
        Batch b;
        b.x = random_rows(rng, n, features);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            b.y.push_back(static_cast<int>(rng.below(static_cast<std::size_t>(classes))));
        }
        batches.push_back(std::move(b));
    }
    return DomainDataset(features, classes, std::move(batches));
}

/// Per-example input gradients of `params` at the rows of x, by finite
/// differences of the one-example loss.
RowMatrix fd_input_rows(const ModelParams& params, const RowMatrix& x,
                        const std::vector<int>& targets)
{
    RowMatrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
    {
        const int y = targets[static_cast<std::size_t>(i)];
        auto f = [&](const Eigen::VectorXd& xi) {
            return mean_loss(params, Batch{xi.transpose(), {y}}, Exec::kSerial);
        };
        out.row(i) = oracles::fd_gradient5(f, x.row(i).transpose(), kFdStep).transpose();
    }
    return out;
}

}  // namespace

std::string format_criterion(const CriterionResult& r)
{
    return fmt::format("{} [{}] {}: {}", r.passed ? "PASS" : "FAIL", r.id, r.name,
                       r.detail);
}

CriterionResult mirror_descent_property(int instances, std::uint64_t seed)
{
    const Rng root(seed);
    int violations = 0;
    double worst = 0.0;
    for (int t = 0; t < instances; ++t)
    {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        const int k = 2 + static_cast<int>(rng.below(5));
        const int P = 1 + static_cast<int>(rng.below(8));
        GradientSet gs;
        gs.losses = random_vector(rng, k, 1.0).cwiseAbs();
        gs.grads.resize(k, P);
        for (int i = 0; i < k; ++i)
        {
            gs.grads.row(i) = random_vector(rng, P, 1.0).transpose();
        }
        Eigen::VectorXd a = random_vector(rng, k, 1.0).array().exp().matrix();
        DomainWeights alpha{a / a.sum()};
        const double eta = 0.01 + rng.uniform();
        const std::vector<int> n(static_cast<std::size_t>(k), 10);
        const DomainWeights next = cgd_alpha_update(alpha, gs, eta,
                                                    CgdVariant::kInnerProduct, 0.5, 0.0, n);
        const Eigen::VectorXd g = gs.grads.colwise().mean().transpose();
        const Eigen::VectorXd c = gs.grads * g;
        const double before = alpha.alpha.dot(c);
        const double after = next.alpha.dot(c);
        const double deficit = before - after;
        worst = std::max(worst, deficit);
        violations += deficit > 1e-12 ? 1 : 0;
    }
    return {6, "weight update never lowers the alignment with the mean gradient",
            violations == 0,
            fmt::format("{} instances, {} violations beyond 1e-12, largest decrease {:.3g}",
                        instances, violations, worst)};
}

CriterionResult gradient_correctness(int cases, std::uint64_t seed)
{
    const Rng root(seed);
    double err_params = 0.0;
    double err_inputs = 0.0;
    double err_csd = 0.0;
    double err_label = 0.0;
    double err_domain = 0.0;
    for (int t = 0; t < cases; ++t)
    {
        Rng rng = root.split(static_cast<std::uint64_t>(t));
        const int features = 1 + static_cast<int>(rng.below(4));
        const int classes = 2 + static_cast<int>(rng.below(3));

        // Parameters and inputs of the plain cross-entropy.
        {
            const Architecture arch = random_arch(rng, features, classes);
            ModelParams params{arch, random_vector(rng, static_cast<Eigen::Index>(
                                                            arch.param_count()),
                                                   0.7)};
            const auto n = static_cast<Eigen::Index>(1 + rng.below(12));
            Batch b{random_rows(rng, n, features), {}};
            for (Eigen::Index i = 0; i < n; ++i)
            {
                b.y.push_back(static_cast<int>(rng.below(static_cast<std::size_t>(classes))));
            }
            const Eigen::VectorXd analytic = loss_and_grad(params, b).grad;
            auto f = [&](const Eigen::VectorXd& th) {
                return mean_loss(ModelParams{arch, th}, b, Exec::kSerial);
            };
            err_params = std::max(err_params,
                                  oracles::relative_error(
                                      analytic, oracles::fd_gradient5(f, params.theta, kFdStep)));
            const RowMatrix gx = kernels::input_grad_rows(params, b.x, b.y, Exec::kParallel);
            const RowMatrix fx = fd_input_rows(params, b.x, b.y);
            for (Eigen::Index i = 0; i < n; ++i)
            {
                err_inputs = std::max(
                    err_inputs, oracles::relative_error(gx.row(i).transpose(),
                                                        fx.row(i).transpose()));
            }
        }

        // Common-specific objective.
        {
            const int domains = 2 + static_cast<int>(rng.below(3));
            const DomainDataset data = random_dataset(rng, domains, features, classes);
            CSDTrainConfig cfg;
            cfg.k = static_cast<int>(rng.below(static_cast<std::size_t>(domains)));
            cfg.lambda = rng.uniform() * 2.0;
            cfg.kappa = rng.uniform() * 2.0;
            const Architecture arch = random_arch(rng, features, classes);
            CsdParams params = CsdParams::initial(arch, cfg.k, domains, rng.next_u64(), 0.5);
            params.theta() += random_vector(rng, params.theta().size(), 0.5);
            Eigen::VectorXd analytic;
            csd_objective(params, data, cfg, &analytic);
            auto f = [&](const Eigen::VectorXd& th) {
                CsdParams p = params;
                p.theta() = th;
                return csd_objective(p, data, cfg, nullptr);
            };
            err_csd = std::max(err_csd,
                               oracles::relative_error(
                                   analytic, oracles::fd_gradient5(f, params.theta(), kFdStep)));
        }

        // Both CrossGrad updates, recovered from one step at lr = 1.
        {
            const int domains = 2 + static_cast<int>(rng.below(2));
            const DomainDataset data = random_dataset(rng, domains, features, 2);
            CrossGradConfig cfg;
            cfg.eps_label = 0.1 + rng.uniform();
            cfg.eps_domain = 0.1 + rng.uniform();
            cfg.alpha_label = rng.uniform();
            cfg.alpha_domain = rng.uniform();
            cfg.lr = 1.0;
            cfg.domain_hidden = {3};
            const Architecture label_arch = random_arch(rng, features, 2);
            DualParams dual = initial_dual(label_arch, domains, cfg);
            dual.theta_label.theta = random_vector(rng, dual.theta_label.theta.size(), 0.7);
            dual.theta_domain.theta = random_vector(rng, dual.theta_domain.theta.size(), 0.7);
            const DualParams next = crossgrad_step(dual, data.domains(), cfg);
            const Eigen::VectorXd g_label = dual.theta_label.theta - next.theta_label.theta;
            const Eigen::VectorXd g_domain = dual.theta_domain.theta - next.theta_domain.theta;

            std::vector<Batch> shifted_for_label;
            std::vector<Batch> shifted_for_domain;
            std::vector<Batch> domain_batches;
            for (int i = 0; i < domains; ++i)
            {
                const Batch& b = data.domain(i);
                const std::vector<int> dy(b.size(), i);
                shifted_for_label.push_back(
                    {b.x + cfg.eps_label * fd_input_rows(dual.theta_domain, b.x, dy), b.y});
                shifted_for_domain.push_back(
                    {b.x + cfg.eps_domain * fd_input_rows(dual.theta_label, b.x, b.y), dy});
                domain_batches.push_back({b.x, dy});
            }
            auto label_loss = [&](const Eigen::VectorXd& th) {
                const ModelParams p{label_arch, th};
                double total = 0.0;
                for (int i = 0; i < domains; ++i)
                {
                    total += (1.0 - cfg.alpha_label) * mean_loss(p, data.domain(i), Exec::kSerial) +
                             cfg.alpha_label * mean_loss(p, shifted_for_label[static_cast<std::size_t>(i)],
                                                         Exec::kSerial);
                }
                return total / domains;
            };
            auto domain_loss = [&](const Eigen::VectorXd& th) {
                const ModelParams p{dual.theta_domain.arch, th};
                double total = 0.0;
                for (int i = 0; i < domains; ++i)
                {
                    const auto s = static_cast<std::size_t>(i);
                    total += (1.0 - cfg.alpha_domain) * mean_loss(p, domain_batches[s], Exec::kSerial) +
                             cfg.alpha_domain * mean_loss(p, shifted_for_domain[s], Exec::kSerial);
                }
                return total / domains;
            };
            err_label = std::max(err_label,
                                 oracles::relative_error(g_label, oracles::fd_gradient5(
                                                                      label_loss,
                                                                      dual.theta_label.theta,
                                                                      kFdStep)));
            err_domain = std::max(err_domain,
                                  oracles::relative_error(g_domain, oracles::fd_gradient5(
                                                                        domain_loss,
                                                                        dual.theta_domain.theta,
                                                                        kFdStep)));
        }
    }
    const double worst = std::max({err_params, err_inputs, err_csd, err_label, err_domain});
    return {8, "analytic gradients match finite differences", worst <= kGradTolerance,
            fmt::format("{} cases per family, max relative error: parameters {:.2e}, "
                        "inputs {:.2e}, common-specific {:.2e}, crossgrad label {:.2e}, "
                        "crossgrad domain {:.2e} (limit {:.0e})",
                        cases, err_params, err_inputs, err_csd, err_label, err_domain,
                        kGradTolerance)};
}

CriterionResult degenerate_reductions(const std::vector<std::uint64_t>& seeds, int threads)
{
    const TaskKind tasks[] = {TaskKind::kNoiseSimple, TaskKind::kRotationSimple,
                              TaskKind::kSpuriousSimple};
    const std::size_t jobs = seeds.size() * 3;
    // Per job: mismatching trajectories for CGD, ERM-UW and CrossGrad.
    std::vector<std::array<int, 3>> mismatches(jobs, {0, 0, 0});
    run_indexed(jobs, threads, [&](std::size_t j) {
        SynthTask task;
        task.kind = tasks[j % 3];
        task.seed = seeds[j / 3];
        const TaskData data = make_task(task);
        TrainConfig base;
        base.seed = task.seed;
        base.record_theta = true;
        base.algorithm = Algorithm::kErm;
        const RunResult erm = train(data.train, base);

        TrainConfig cgd = base;
        cgd.algorithm = Algorithm::kCgd;
        cgd.eta_alpha = 0.0;
        TrainConfig uw = base;
        uw.algorithm = Algorithm::kErmUw;
        uw.C = 0.0;
        TrainConfig cg = base;
        cg.algorithm = Algorithm::kCrossGrad;
        cg.crossgrad.eps_label = 0.0;
        cg.crossgrad.eps_domain = 0.0;
        const TrainConfig* variants[] = {&cgd, &uw, &cg};
        for (int v = 0; v < 3; ++v)
        {
            const RunResult r = train(data.train, *variants[v]);
            bool same = r.theta_trajectory.size() == erm.theta_trajectory.size();
            for (std::size_t e = 0; same && e < r.theta_trajectory.size(); ++e)
            {
                const Eigen::VectorXd& a = r.theta_trajectory[e];
                const Eigen::VectorXd& b = erm.theta_trajectory[e];
                same = a.size() == b.size() &&
                       std::equal(a.data(), a.data() + a.size(), b.data());
            }
            mismatches[j][static_cast<std::size_t>(v)] = same ? 0 : 1;
        }
    });
    std::array<int, 3> totals{0, 0, 0};
    for (const auto& m : mismatches)
    {
        for (std::size_t v = 0; v < 3; ++v)
        {
            totals[v] += m[v];
        }
    }
    const bool ok = totals[0] + totals[1] + totals[2] == 0;
    return {9, "degenerate settings reproduce the ERM trajectory bitwise", ok,
            fmt::format("{} task/seed runs of 400 epochs; mismatching runs: cgd(eta_alpha=0) {}, "
                        "erm-uw(C=0) {}, crossgrad(eps=0) {}",
                        jobs, totals[0], totals[1], totals[2])};
}

CriterionResult dg_example_directional(const std::vector<std::uint64_t>& seeds, int threads)
{
    // Per seed: ERM reference head, ERM softmax head, CSD, CrossGrad.
    std::vector<std::array<double, 4>> acc(seeds.size());
    run_indexed(seeds.size(), threads, [&](std::size_t i) {
        SynthTask task;
        task.kind = TaskKind::kDgExample;
        task.seed = seeds[i];
        const TaskData data = make_task(task);
        auto worst = [](const DomainMetrics& m) {
            return *std::min_element(m.accuracy.begin(), m.accuracy.end());
        };
        TrainConfig erm;
        erm.algorithm = Algorithm::kErm;
        erm.seed = task.seed;
        acc[i][0] = worst(*train(data.train, erm, &data.test).test_metrics);
        erm.head = Head::kSoftmax;
        acc[i][1] = worst(*train(data.train, erm, &data.test).test_metrics);
        CSDTrainConfig csd;
        csd.seed = task.seed;
        acc[i][2] = worst(*csd_train(data.train, csd, &data.test).test_metrics);
        TrainConfig cg;
        cg.algorithm = Algorithm::kCrossGrad;
        cg.seed = task.seed;
        acc[i][3] = worst(*train(data.train, cg, &data.test).test_metrics);
    });
    std::array<double, 4> mean{0, 0, 0, 0};
    for (const auto& a : acc)
    {
        for (std::size_t j = 0; j < 4; ++j)
        {
            mean[j] += a[j] / static_cast<double>(acc.size());
        }
    }
    const bool csd_ok = mean[2] >= mean[1];
    const bool cg_ok = mean[3] >= mean[0];
    return {10, "dg-example worst-domain accuracy: CSD and CrossGrad at least ERM",
            csd_ok && cg_ok,
            fmt::format("{}-seed means: CSD {:.4f} vs softmax-head ERM {:.4f} ({}); "
                        "CrossGrad {:.4f} vs reference-head ERM {:.4f} ({}); "
                        "each method is compared with ERM on the same head "
                        "(CSD vs reference-head ERM: {:.4f} vs {:.4f})",
                        seeds.size(), mean[2], mean[1], csd_ok ? "ok" : "below", mean[3],
                        mean[0], cg_ok ? "ok" : "below", mean[2], mean[0])};
}

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& report)
{
    std::vector<CriterionResult> out;
    auto emit = [&](CriterionResult r) {
        if (report)
        {
            report(r);
        }
        out.push_back(std::move(r));
    };

    BenchOptions bench;
    bench.seeds = opt.seeds;
    bench.threads = opt.threads;
    bench.tolerance_scale = opt.tolerance_scale;
    const ToyTableResult toy = run_toy_table(bench);
    emit(fold(1, "toy-table worst-domain test loss within mean +- 2 std", toy.checks,
              {"worst-loss"}));
    emit(fold(2, "toy-table macro train loss within +- 0.10", toy.checks, {"train-loss"}));
    emit(fold(3, "cgd below group-dro in worst loss and solution variance", toy.checks,
              {"order"}));

    const DecompositionResult dec = run_decomposition(
        0, [](const Eigen::MatrixXd& W, int k) { return oracles::decomposition_min(W, k); });
    emit(fold(4, "decomposition closed forms and oracle optimality", dec.checks,
              {"decompose k=", "decompose w_c", "decompose rank", "decompose objective"}));
    emit(fold(5, "worked decompositions recovered", dec.checks,
              {"decompose ideal", "decompose practice"}));

    emit(mirror_descent_property(opt.mirror_instances));

    const ConvergenceResult conv = run_convergence();
    emit(fold(7, "cgd reaches an epsilon-stationary point within the iteration bound",
              conv.checks, {"convergence"}));

    emit(gradient_correctness(opt.gradient_cases));
    emit(degenerate_reductions(opt.seeds, opt.threads));
    emit(dg_example_directional(opt.dg_seeds, opt.threads));
    return out;
}

}  // namespace domainshift::checks
