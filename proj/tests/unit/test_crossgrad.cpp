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

#include "domainshift/crossgrad/crossgrad.hpp"
#include "domainshift/error.hpp"
#include "domainshift/reweighting/reweighting.hpp"
#include "domainshift/reweighting/train.hpp"
#include "domainshift/synth/synth.hpp"
#include "helpers.hpp"
#include "oracles/oracles.hpp"

#include <gtest/gtest.h>

namespace domainshift
{
namespace
{

using testing::random_batch;

Eigen::VectorXd flatten(const RowMatrix& x)
{
    return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

TEST(InputGrad, ZeroLinearModelGivesZero)
{
    Rng rng(1);
    const Batch b = random_batch(rng, 10, 3, 2);
    const ModelParams p = ModelParams::zeros(Architecture::linear(3, 2));
    EXPECT_TRUE(input_grad(p, b.x, b.y).isZero(0.0));
}

TEST(InputGrad, LinearClosedForm)
{
    Rng rng(2);
    const Batch b = random_batch(rng, 12, 3, 4);
    ModelParams p = ModelParams::zeros(Architecture::linear(3, 4));
    p.theta = testing::random_vector(rng, p.theta.size());
    const RowMatrix g = input_grad(p, b.x, b.y);
    const Eigen::MatrixXd W = p.head_weights();
    const Eigen::VectorXd bias = p.head_bias();
    const double n = static_cast<double>(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
    {
        const auto r = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd z = W * b.x.row(r).transpose() + bias;
        Eigen::VectorXd prob = (z.array() - z.maxCoeff()).exp();
        prob /= prob.sum();
        prob[b.y[i]] -= 1.0;
        const Eigen::VectorXd expected = W.transpose() * prob / n;
        EXPECT_LE((g.row(r).transpose() - expected).norm(), 1e-14);
    }
}

TEST(InputGrad, MatchesFiniteDifferences)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        Rng rng(seed);
        const Batch b = random_batch(rng, 8, 3, 3);
        const ModelParams p = ModelParams::initial(Architecture::mlp(3, {5}, 3), seed);
        const RowMatrix g = input_grad(p, b.x, b.y);
        const Eigen::VectorXd fd = fd_gradient(
            [&](const Eigen::VectorXd& v) {
                const RowMatrix x = Eigen::Map<const RowMatrix>(v.data(), b.x.rows(), b.x.cols());
                return mean_loss(p, Batch{x, b.y});
            },
            flatten(b.x), 1e-6);
        EXPECT_LE((flatten(g) - fd).norm() / std::max(1.0, fd.norm()), 1e-5) << "seed " << seed;
    }
}

TEST(Perturb, Examples)
{
    Rng rng(3);
    const RowMatrix x = testing::random_batch(rng, 4, 3, 2).x;
    const RowMatrix g = testing::random_batch(rng, 4, 3, 2).x;
    EXPECT_TRUE(perturb(x, g, 0.0) == x);
    EXPECT_TRUE(perturb(x, RowMatrix::Zero(4, 3), 1.7) == x);
    RowMatrix one(1, 2);
    one << 1.0, 1.0;
    RowMatrix dir(1, 2);
    dir << 0.5, -0.5;
    const RowMatrix out = perturb(one, dir, 2.0);
    EXPECT_DOUBLE_EQ(out(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(out(0, 1), 0.0);
    for (double eps : {0.1, 1.0, 3.5})
    {
        EXPECT_NEAR((perturb(x, g, eps) - x).norm(), eps * g.norm(), 1e-12 * g.norm());
    }
}

struct StepFixture
{
    std::vector<Batch> batches;
    DualParams dual;
};

StepFixture make_fixture(std::uint64_t seed)
{
    Rng rng(seed);
    StepFixture f;
    for (int i = 0; i < 3; ++i)
    {
        f.batches.push_back(random_batch(rng, 20 + 5 * i, 2, 2));
    }
    CrossGradConfig cfg;
    cfg.seed = seed;
    f.dual = initial_dual(Architecture::mlp(2, {3}, 2, Head::kReferenceClass), 3, cfg);
    return f;
}

/// One uniform-weight descent step on each network with its own targets.
DualParams erm_steps(const StepFixture& f, double lr)
{
    std::vector<Batch> by_domain;
    for (std::size_t i = 0; i < f.batches.size(); ++i)
    {
        by_domain.push_back(
            Batch{f.batches[i].x, std::vector<int>(f.batches[i].size(), static_cast<int>(i))});
    }
    const DomainDataset labels(2, 2, f.batches);
    const DomainDataset domains(2, 3, by_domain);
    const Eigen::VectorXd w = DomainWeights::uniform(3).alpha;
    DualParams out = f.dual;
    out.theta_label.theta = weighted_step(
        f.dual.theta_label.theta, w, domain_stats(f.dual.theta_label, labels).grads, lr);
    out.theta_domain.theta = weighted_step(
        f.dual.theta_domain.theta, w, domain_stats(f.dual.theta_domain, domains).grads, lr);
    return out;
}

TEST(CrossGradStep, ZeroMixingIsTwoErmSteps)
{
    const StepFixture f = make_fixture(4);
    CrossGradConfig cfg;
    cfg.alpha_label = 0.0;
    cfg.alpha_domain = 0.0;
    cfg.eps_label = 2.0;
    cfg.eps_domain = 2.0;
    const DualParams out = crossgrad_step(f.dual, f.batches, cfg);
    const DualParams ref = erm_steps(f, cfg.lr);
    EXPECT_TRUE(out.theta_label.theta == ref.theta_label.theta);
    EXPECT_TRUE(out.theta_domain.theta == ref.theta_domain.theta);
}

TEST(CrossGradStep, ZeroEpsilonIsTwoErmSteps)
{
    const StepFixture f = make_fixture(5);
    CrossGradConfig cfg;
    cfg.alpha_label = 0.7;
    cfg.alpha_domain = 0.3;
    cfg.eps_label = 0.0;
    cfg.eps_domain = 0.0;
    const DualParams out = crossgrad_step(f.dual, f.batches, cfg);
    const DualParams ref = erm_steps(f, cfg.lr);
    EXPECT_TRUE(out.theta_label.theta == ref.theta_label.theta);
    EXPECT_TRUE(out.theta_domain.theta == ref.theta_domain.theta);
}

TEST(CrossGradStep, DomainNetIgnoresClassLabels)
{
    StepFixture f = make_fixture(6);
    CrossGradConfig cfg;
    cfg.alpha_domain = 0.0;
    const DualParams a = crossgrad_step(f.dual, f.batches, cfg);
    for (Batch& b : f.batches)
    {
        for (int& y : b.y)
        {
            y = 1 - y;
        }
    }
    const DualParams b = crossgrad_step(f.dual, f.batches, cfg);
    EXPECT_TRUE(a.theta_domain.theta == b.theta_domain.theta);
    EXPECT_FALSE(a.theta_label.theta == b.theta_label.theta);
}

TEST(CrossGradStep, Errors)
{
    const StepFixture f = make_fixture(7);
    CrossGradConfig cfg;
    EXPECT_THROW(crossgrad_step(f.dual, std::span<const Batch>(f.batches).first(2), cfg),
                 ConfigError);
    cfg.alpha_label = 1.5;
    EXPECT_THROW(crossgrad_step(f.dual, f.batches, cfg), ConfigError);
}

TEST(CrossGradTrain, ZeroEpsilonMatchesErmBitwise)
{
    SynthTask task;
    task.kind = TaskKind::kDgExample;
    task.seed = 3;
    const TaskData d = make_task(task);
    TrainConfig erm;
    erm.algorithm = Algorithm::kErm;
    erm.epochs = 40;
    erm.record_theta = true;
    TrainConfig cg = erm;
    cg.algorithm = Algorithm::kCrossGrad;
    cg.crossgrad.eps_label = 0.0;
    cg.crossgrad.eps_domain = 0.0;
    const RunResult a = train(d.train, erm);
    const RunResult b = train(d.train, cg);
    ASSERT_EQ(a.theta_trajectory.size(), b.theta_trajectory.size());
    for (std::size_t e = 0; e < a.theta_trajectory.size(); ++e)
    {
        EXPECT_TRUE(a.theta_trajectory[e] == b.theta_trajectory[e]) << "epoch " << e;
    }
    ASSERT_TRUE(b.domain_params.has_value());
    EXPECT_EQ(b.domain_params->arch.classes, d.train.num_domains());
}

TEST(CrossGradTrain, Deterministic)
{
    SynthTask task;
    task.kind = TaskKind::kDgExample;
    const TaskData d = make_task(task);
    CrossGradConfig cfg;
    cfg.epochs = 20;
    const RunResult a = crossgrad_train(d.train, cfg, &d.test);
    const RunResult b = crossgrad_train(d.train, cfg, &d.test);
    EXPECT_TRUE(a.params.theta == b.params.theta);
    EXPECT_EQ(a.test_metrics->accuracy, b.test_metrics->accuracy);
}

}  // namespace
}  // namespace domainshift
