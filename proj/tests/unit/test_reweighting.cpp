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

#include "domainshift/error.hpp"
#include "domainshift/harness/bench.hpp"
#include "domainshift/reweighting/reweighting.hpp"
#include "domainshift/reweighting/train.hpp"
#include "domainshift/synth/synth.hpp"
#include "helpers.hpp"
#include "oracles/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace domainshift
{
namespace
{

GradientSet make_gs(const Eigen::VectorXd& losses, const Eigen::MatrixXd& grads)
{
    return GradientSet{losses, grads};
}

void expect_simplex(const DomainWeights& w)
{
    EXPECT_TRUE((w.alpha.array() > 0.0).all());
    EXPECT_NEAR(w.alpha.sum(), 1.0, 1e-9);
}

TEST(ErmUwWeights, Examples)
{
    const std::vector<int> n{100, 4};
    const DomainWeights c0 = erm_uw_weights(n, 0.0);
    EXPECT_DOUBLE_EQ(c0.alpha[0], 0.5);
    EXPECT_DOUBLE_EQ(c0.alpha[1], 0.5);
    const std::vector<int> same{100, 100};
    const DomainWeights sym = erm_uw_weights(same, 3.7);
    EXPECT_DOUBLE_EQ(sym.alpha[0], 0.5);
    EXPECT_DOUBLE_EQ(sym.alpha[1], 0.5);
    const DomainWeights c2 = erm_uw_weights(n, 2.0);
    const double z = std::exp(0.2) + std::exp(1.0);
    EXPECT_NEAR(c2.alpha[0], std::exp(0.2) / z, 1e-15);
    EXPECT_NEAR(c2.alpha[1], std::exp(1.0) / z, 1e-15);
    EXPECT_NEAR(c2.alpha[0], 0.3100, 5e-5);
    EXPECT_NEAR(c2.alpha[1], 0.6900, 5e-5);
}

TEST(ChoiceAdjust, Examples)
{
    const std::vector<int> n{100, 4};
    const Eigen::VectorXd a = choice_adjust(Eigen::Vector2d(0.5, 0.2), n, 2.0);
    EXPECT_NEAR(a[0], 0.7, 1e-15);
    EXPECT_NEAR(a[1], 1.2, 1e-15);
    const Eigen::Vector2d l(0.31, 0.77);
    EXPECT_TRUE(choice_adjust(l, n, 0.0) == Eigen::VectorXd(l));
    const std::vector<int> n3{1, 4, 16};
    const Eigen::VectorXd z = choice_adjust(Eigen::Vector3d::Zero(), n3, 1.0);
    EXPECT_DOUBLE_EQ(z[0], 1.0);
    EXPECT_DOUBLE_EQ(z[1], 0.5);
    EXPECT_DOUBLE_EQ(z[2], 0.25);
}

TEST(GroupDroSelect, Examples)
{
    EXPECT_EQ(group_dro_select(Eigen::Vector3d(0.1, 0.9, 0.3)), 1);
    EXPECT_EQ(group_dro_select(Eigen::Vector2d(0.4, 0.4)), 0);
}

TEST(GroupDroSelect, PermutationConsistent)
{
    Rng rng(1);
    for (int t = 0; t < 100; ++t)
    {
        const Eigen::VectorXd v = testing::random_vector(rng, 6);
        std::vector<int> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = 5; i > 0; --i)
        {
            std::swap(perm[static_cast<std::size_t>(i)],
                      perm[rng.below(static_cast<std::size_t>(i) + 1)]);
        }
        Eigen::VectorXd pv(6);
        for (int j = 0; j < 6; ++j)
        {
            pv[j] = v[perm[static_cast<std::size_t>(j)]];
        }
        EXPECT_EQ(perm[static_cast<std::size_t>(group_dro_select(pv))], group_dro_select(v));
    }
}

TEST(CgdAlphaUpdate, SymmetricDomainsStayUniform)
{
    const std::vector<int> n{10, 10};
    Eigen::MatrixXd g(2, 3);
    g << 0.3, -1.0, 2.0, 0.3, -1.0, 2.0;
    const GradientSet gs = make_gs(Eigen::Vector2d(0.4, 0.4), g);
    for (CgdVariant v : {CgdVariant::kInnerProduct, CgdVariant::kScaledCosine})
    {
        const DomainWeights out =
            cgd_alpha_update(DomainWeights::uniform(2), gs, 0.7, v, 0.5, 0.0, n);
        EXPECT_DOUBLE_EQ(out.alpha[0], 0.5);
        EXPECT_DOUBLE_EQ(out.alpha[1], 0.5);
    }
}

TEST(CgdAlphaUpdate, OrthogonalUnitGradients)
{
    const std::vector<int> n{10, 10};
    const GradientSet gs =
        make_gs(Eigen::Vector2d(1.0, 0.0), Eigen::Matrix2d::Identity());
    const DomainWeights out = cgd_alpha_update(DomainWeights::uniform(2), gs, 1.0,
                                               CgdVariant::kScaledCosine, 0.5, 0.0, n);
    const double e = std::numbers::e;
    EXPECT_NEAR(out.alpha[0], e / (e + 1.0), 1e-15);
    EXPECT_NEAR(out.alpha[1], 1.0 / (e + 1.0), 1e-15);
    EXPECT_NEAR(out.alpha[0], 0.7311, 5e-5);
}

TEST(CgdAlphaUpdate, InnerProductMatchesSimplexOracles)
{
    Rng rng(21);
    const std::vector<int> n{5, 5, 5};
    for (int t = 0; t < 10; ++t)
    {
        Eigen::VectorXd alpha = Eigen::Vector3d(0.2 + rng.uniform(), 0.2 + rng.uniform(),
                                                0.2 + rng.uniform());
        alpha /= alpha.sum();
        const Eigen::MatrixXd g = testing::random_matrix(rng, 3, 4);
        const double eta = 0.05 + 0.2 * rng.uniform();
        const GradientSet gs = make_gs(Eigen::Vector3d::Constant(0.5), g);
        const DomainWeights out = cgd_alpha_update(DomainWeights{alpha}, gs, eta,
                                                   CgdVariant::kInnerProduct, 0.5, 0.0, n);
        const Eigen::VectorXd ascent = oracles::alpha_objective_argmax(alpha, g, eta);
        EXPECT_LE((out.alpha - ascent).lpNorm<Eigen::Infinity>(), 1e-4) << "case " << t;
        if (t < 2)
        {
            const int res = 1000;
            const Eigen::VectorXd grid = oracles::alpha_objective_grid(alpha, g, eta, res);
            EXPECT_LE((out.alpha - grid).lpNorm<Eigen::Infinity>(), 2.0 / res) << "case " << t;
            EXPECT_GE(oracles::alpha_objective(out.alpha, alpha, g, eta) + 1e-12,
                      oracles::alpha_objective(grid, alpha, g, eta));
        }
    }
}

TEST(CgdAlphaUpdate, GroupDroLimitWithOrthogonalGradients)
{
    Rng rng(4);
    const std::vector<int> n{3, 7, 11, 19};
    for (int t = 0; t < 50; ++t)
    {
        // Orthogonal rows of random length.
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 6);
        for (int i = 0; i < 4; ++i)
        {
            g(i, i + (t % 3)) = 0.1 + 3.0 * rng.uniform();
        }
        const Eigen::Vector4d losses(2.0 * rng.uniform(), 2.0 * rng.uniform(),
                                     2.0 * rng.uniform(), 2.0 * rng.uniform());
        Eigen::VectorXd alpha = Eigen::Vector4d(rng.uniform(), rng.uniform(),
                                                rng.uniform(), rng.uniform())
                                    .array() +
                                0.1;
        alpha /= alpha.sum();
        const double eta = 3.0 * rng.uniform();
        const DomainWeights out =
            cgd_alpha_update(DomainWeights{alpha}, make_gs(losses, g), eta,
                             CgdVariant::kScaledCosine, 0.5, 0.0, n);
        Eigen::VectorXd expected = alpha.array() * (eta * losses.array()).exp();
        expected /= expected.sum();
        EXPECT_LE((out.alpha - expected).lpNorm<Eigen::Infinity>(), 1e-12);
    }
}

TEST(CgdAlphaUpdate, StaysOnSimplex)
{
    Rng rng(6);
    const std::vector<int> n{4, 50, 200};
    for (int t = 0; t < 300; ++t)
    {
        const Eigen::MatrixXd g = testing::random_matrix(rng, 3, 5) * std::exp(2.0 * rng.normal());
        const Eigen::Vector3d losses(rng.uniform(), 3.0 * rng.uniform(), rng.uniform());
        DomainWeights alpha = DomainWeights::uniform(3);
        for (int s = 0; s < 5; ++s)
        {
            alpha = cgd_alpha_update(alpha, make_gs(losses, g), 0.5,
                                     t % 2 == 0 ? CgdVariant::kInnerProduct
                                                : CgdVariant::kScaledCosine,
                                     0.5, 1.0, n);
            expect_simplex(alpha);
        }
    }
}

TEST(CgdAlphaUpdate, MirrorDescentMonotonicity)
{
    Rng rng(8);
    for (int t = 0; t < 1000; ++t)
    {
        const int k = 2 + static_cast<int>(rng.below(5));
        const Eigen::MatrixXd g = testing::random_matrix(rng, k, 1 + static_cast<int>(rng.below(6)));
        Eigen::VectorXd alpha = (testing::random_vector(rng, k).array().abs() + 0.01).matrix();
        alpha /= alpha.sum();
        const double eta = std::exp(rng.normal() - 1.0);
        const std::vector<int> n(static_cast<std::size_t>(k), 10);
        const DomainWeights out =
            cgd_alpha_update(DomainWeights{alpha}, make_gs(Eigen::VectorXd::Ones(k), g), eta,
                             CgdVariant::kInnerProduct, 0.5, 0.0, n);
        const Eigen::VectorXd mean = g.colwise().mean().transpose();
        const Eigen::VectorXd c = g * mean;
        EXPECT_GE(out.alpha.dot(c), alpha.dot(c) - 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()));
    }
}

TEST(CgdAlphaUpdate, NonFiniteExponentThrows)
{
    const std::vector<int> n{1, 1};
    Eigen::MatrixXd g(2, 1);
    g << std::numeric_limits<double>::infinity(), 1.0;
    EXPECT_THROW(cgd_alpha_update(DomainWeights::uniform(2),
                                  make_gs(Eigen::Vector2d(1.0, 1.0), g), 1.0,
                                  CgdVariant::kInnerProduct, 0.5, 0.0, n),
                 NumericError);
}

TEST(CgdStep, SingleDomainIsPlainGradientStep)
{
    const DomainDataset data = testing::random_dataset(3, {40}, 3, 2);
    const ModelParams p = ModelParams::initial(Architecture::mlp(3, {4}, 2), 3);
    CGDConfig cfg;
    cfg.eta = 0.3;
    const auto [next, alpha] = cgd_step(p, DomainWeights::uniform(1), data, cfg);
    const LossGrad lg = loss_and_grad(p, data.domain(0));
    EXPECT_EQ(alpha.alpha.size(), 1);
    EXPECT_DOUBLE_EQ(alpha.alpha[0], 1.0);
    EXPECT_LE((next.theta - (p.theta - 0.3 * lg.grad)).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(CgdStep, ZeroStepLeavesThetaAndMovesAlpha)
{
    const DomainDataset data = testing::random_dataset(4, {30, 50, 10}, 2, 2);
    ModelParams p = ModelParams::zeros(Architecture::linear(2, 2, Head::kReferenceClass));
    p.theta << 1.0, -0.5, 0.2;
    CGDConfig cfg;
    cfg.eta = 0.0;
    cfg.eta_alpha = 0.5;
    const auto [next, alpha] = cgd_step(p, DomainWeights::uniform(3), data, cfg);
    EXPECT_TRUE(next.theta == p.theta);
    const GradientSet gs = domain_stats(p, data);
    const DomainWeights expected =
        cgd_alpha_update(DomainWeights::uniform(3), gs, 0.5, cfg.variant, cfg.p, cfg.C,
                         data.sizes());
    EXPECT_TRUE(alpha.alpha == expected.alpha);
    EXPECT_GT((alpha.alpha - DomainWeights::uniform(3).alpha).norm(), 0.0);
}

TEST(CgdStep, MacroRiskDescendsOnConvexInstance)
{
    const DomainDataset data = convergence_instance(0);
    ModelParams p = ModelParams::zeros(Architecture::linear(2, 2, Head::kReferenceClass));
    DomainWeights alpha = DomainWeights::uniform(3);
    CGDConfig cfg;
    cfg.eta = 0.05;
    cfg.eta_alpha = 0.01;
    cfg.variant = CgdVariant::kInnerProduct;
    double risk = macro_risk(p, data);
    for (int t = 0; t < 100; ++t)
    {
        std::tie(p, alpha) = cgd_step(p, alpha, data, cfg);
        const double next = macro_risk(p, data);
        EXPECT_LE(next, risk + 1e-9) << "step " << t;
        risk = next;
        expect_simplex(alpha);
    }
}

TEST(FospNorm, VanishesAtLogisticOptimum)
{
    // One domain, so the macro risk is the plain mean logistic loss.
    const DomainDataset data = testing::random_dataset(5, {300}, 3, 2);
    const Batch& b = data.domain(0);
    const Eigen::VectorXd opt = oracles::logistic_fit(testing::dense(b.x), b.y);
    const ModelParams p{Architecture::linear(3, 2, Head::kReferenceClass), opt};
    EXPECT_LE(fosp_norm(p, data), 1e-6);
}

TEST(FospNorm, EqualsMeanDomainGradient)
{
    const DomainDataset data = testing::random_dataset(6, {20, 20, 20}, 2, 2);
    const ModelParams p = ModelParams::zeros(Architecture::linear(2, 2, Head::kReferenceClass));
    const GradientSet gs = domain_stats(p, data);
    const Eigen::VectorXd mean = gs.grads.colwise().mean().transpose();
    EXPECT_NEAR(fosp_norm(p, data), mean.norm(), 1e-14);
}

TEST(TheoremStepSizes, Examples)
{
    const StepSizes a = theorem_step_sizes({1.0, 1.0, 1.0, 4, 0.05});
    EXPECT_DOUBLE_EQ(a.eta, 1.0);
    EXPECT_DOUBLE_EQ(a.eta_alpha, 0.5);
    const StepSizes b = theorem_step_sizes({1.0, 1.0, 1.0, 400, 0.05});
    EXPECT_NEAR(b.eta, a.eta / 10.0, 1e-15);
    EXPECT_NEAR(b.eta_alpha, a.eta_alpha / 10.0, 1e-15);
    const StepSizes c = theorem_step_sizes({2.0, 1.0, 2.0, 100, 0.05});
    EXPECT_NEAR(c.eta, 2.0 * std::sqrt(2.0 / 400.0), 1e-15);
    EXPECT_NEAR(c.eta_alpha, std::sqrt(2.0 / 6400.0), 1e-15);
    EXPECT_NEAR(c.eta, 0.1414, 5e-5);
    EXPECT_NEAR(c.eta_alpha, 0.01768, 5e-6);
    EXPECT_THROW(theorem_step_sizes({0.0, 1.0, 1.0, 4, 0.05}), ConfigError);
}

TrainConfig short_config(Algorithm a)
{
    TrainConfig cfg;
    cfg.algorithm = a;
    cfg.epochs = 30;
    cfg.record_theta = true;
    return cfg;
}

TEST(Train, ErmEquivalences)
{
    SynthTask task;
    task.kind = TaskKind::kRotationSimple;
    task.seed = 2;
    const TaskData d = make_task(task);
    const RunResult erm = train(d.train, short_config(Algorithm::kErm));
    TrainConfig uw = short_config(Algorithm::kErmUw);
    uw.C = 0.0;
    TrainConfig cgd = short_config(Algorithm::kCgd);
    cgd.eta_alpha = 0.0;
    for (const TrainConfig& cfg : {uw, cgd})
    {
        const RunResult r = train(d.train, cfg);
        ASSERT_EQ(r.theta_trajectory.size(), erm.theta_trajectory.size());
        for (std::size_t e = 0; e < erm.theta_trajectory.size(); ++e)
        {
            EXPECT_TRUE(r.theta_trajectory[e] == erm.theta_trajectory[e])
                << to_string(cfg.algorithm) << " epoch " << e;
        }
    }
}

TEST(Train, PermutationEquivariance)
{
    SynthTask task;
    task.kind = TaskKind::kNoiseSimple;
    const TaskData d = make_task(task);
    const std::vector<int> perm{2, 0, 1};
    const DomainDataset train_p = d.train.permuted(perm);
    const DomainDataset test_p = d.test.permuted(perm);
    for (Algorithm a : {Algorithm::kCgd, Algorithm::kGroupDro})
    {
        TrainConfig cfg = short_config(a);
        cfg.epochs = 50;
        const RunResult r = train(d.train, cfg, &d.test);
        const RunResult rp = train(train_p, cfg, &test_p);
        ASSERT_EQ(r.alpha_trajectory.size(), rp.alpha_trajectory.size());
        for (std::size_t e = 0; e < r.alpha_trajectory.size(); ++e)
        {
            for (int j = 0; j < 3; ++j)
            {
                EXPECT_NEAR(rp.alpha_trajectory[e][j],
                            r.alpha_trajectory[e][perm[static_cast<std::size_t>(j)]], 1e-10);
            }
        }
        const auto& l = r.test_metrics->loss;
        const auto& lp = rp.test_metrics->loss;
        EXPECT_NEAR(*std::max_element(l.begin(), l.end()),
                    *std::max_element(lp.begin(), lp.end()), 1e-10);
        EXPECT_NEAR(std::accumulate(l.begin(), l.end(), 0.0),
                    std::accumulate(lp.begin(), lp.end(), 0.0), 1e-10);
    }
}

TEST(Train, GroupDroWeightsAreOneHot)
{
    const DomainDataset data = testing::random_dataset(7, {30, 30, 30}, 2, 2);
    TrainConfig cfg = short_config(Algorithm::kGroupDro);
    const RunResult r = train(data, cfg);
    for (const Eigen::VectorXd& a : r.alpha_trajectory)
    {
        EXPECT_EQ((a.array() == 1.0).count(), 1);
        EXPECT_EQ((a.array() == 0.0).count(), 2);
    }
}

TEST(Train, DivergenceAborts)
{
    const DomainDataset data = testing::random_dataset(8, {20, 20}, 2, 2);
    TrainConfig cfg = short_config(Algorithm::kErm);
    cfg.divergence_threshold = 0.5;  // below ln 2, the loss at zero
    EXPECT_THROW(train(data, cfg), DivergenceError);
}

TEST(Train, DeterministicAcrossRuns)
{
    SynthTask task;
    task.kind = TaskKind::kSpuriousSimple;
    const TaskData d = make_task(task);
    TrainConfig cfg = short_config(Algorithm::kCgd);
    const RunResult a = train(d.train, cfg);
    const RunResult b = train(d.train, cfg);
    EXPECT_TRUE(a.params.theta == b.params.theta);
    for (std::size_t e = 0; e < a.alpha_trajectory.size(); ++e)
    {
        EXPECT_TRUE(a.alpha_trajectory[e] == b.alpha_trajectory[e]);
    }
}

TEST(Train, ParseAlgorithmNames)
{
    for (Algorithm a : {Algorithm::kErm, Algorithm::kErmPooled, Algorithm::kErmUw,
                        Algorithm::kGroupDro, Algorithm::kCgd, Algorithm::kCrossGrad})
    {
        EXPECT_EQ(parse_algorithm(to_string(a)), a);
    }
    EXPECT_THROW(parse_algorithm("sgd"), ConfigError);
}

}  // namespace
}  // namespace domainshift
