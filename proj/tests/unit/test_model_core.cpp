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
#include "domainshift/model/model_core.hpp"
#include "domainshift/synth/synth.hpp"
#include "helpers.hpp"
#include "oracles/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace domainshift
{
namespace
{

using testing::random_batch;
using testing::random_dataset;

TEST(LossAndGrad, ZeroParamsGiveLn2ForBothHeads)
{
    Rng rng(3);
    const Batch b = random_batch(rng, 37, 4, 2);
    double mean_y = 0.0;
    for (int y : b.y)
    {
        mean_y += y;
    }
    mean_y /= static_cast<double>(b.size());
    for (Head head : {Head::kSoftmax, Head::kReferenceClass})
    {
        const ModelParams p = ModelParams::zeros(Architecture::linear(4, 2, head));
        const LossGrad lg = loss_and_grad(p, b);
        EXPECT_NEAR(lg.loss, std::numbers::ln2, 1e-15);
        const auto bias = Eigen::Map<const Eigen::VectorXd>(
            lg.grad.data() + p.arch.head_offset() + 4 * p.arch.logit_rows(),
            p.arch.logit_rows());
        if (head == Head::kReferenceClass)
        {
            EXPECT_NEAR(bias[0], 0.5 - mean_y, 1e-15);
        }
        else
        {
            EXPECT_NEAR(bias[0], 0.5 - (1.0 - mean_y), 1e-15);
            EXPECT_NEAR(bias[1], 0.5 - mean_y, 1e-15);
        }
    }
}

TEST(LossAndGrad, SingleExampleZeroLogits)
{
    std::vector<Example> ex{{Eigen::Vector2d(0.3, -1.2), 1, 0}};
    const ModelParams p = ModelParams::zeros(Architecture::linear(2, 2));
    EXPECT_NEAR(loss_and_grad(p, ex).loss, 0.6931471805599453, 1e-15);
}

TEST(LossAndGrad, MatchesLogisticOracle)
{
    Rng rng(11);
    const Batch b = random_batch(rng, 50, 3, 2);
    ModelParams p = ModelParams::zeros(Architecture::linear(3, 2, Head::kReferenceClass));
    p.theta = testing::random_vector(rng, p.theta.size());
    const Eigen::VectorXd w = p.theta.head(3);
    const double bias = p.theta[3];
    const double n = static_cast<double>(b.size());
    const LossGrad lg = loss_and_grad(p, b);
    EXPECT_NEAR(lg.loss, oracles::logistic_loss(testing::dense(b.x), b.y, w, bias) / n,
                1e-13);
    const Eigen::VectorXd g = oracles::logistic_grad(testing::dense(b.x), b.y, w, bias) / n;
    EXPECT_LT(oracles::relative_error(lg.grad, g), 1e-12);
}

TEST(LossAndGrad, MatchesSoftmaxOracle)
{
    Rng rng(12);
    const Batch b = random_batch(rng, 40, 3, 4);
    ModelParams p = ModelParams::zeros(Architecture::linear(3, 4));
    p.theta = testing::random_vector(rng, p.theta.size());
    const double n = static_cast<double>(b.size());
    const double expected = oracles::softmax_loss(testing::dense(b.x), b.y,
                                                  p.head_weights(), p.head_bias()) /
                            n;
    EXPECT_NEAR(loss_and_grad(p, b).loss, expected, 1e-13);
}

TEST(LossAndGrad, MatchesFiniteDifferencesSeed7)
{
    Rng rng(7);
    const Batch b = random_batch(rng, 30, 3, 3);
    const ModelParams p = ModelParams::initial(Architecture::mlp(3, {5}, 3), 7);
    const LossGrad lg = loss_and_grad(p, b);
    const Eigen::VectorXd fd = fd_gradient(
        [&](const ModelParams& q) { return mean_loss(q, b); }, p, 1e-6);
    EXPECT_LE((lg.grad - fd).norm() / std::max(1.0, fd.norm()), 1e-5);
}

TEST(LossAndGrad, MatchesFivePointStencil)
{
    // Independent oracle: five-point stencil over the raw parameter vector.
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        Rng rng(seed);
        const Batch b = random_batch(rng, 25, 2, 2);
        const ModelParams p =
            ModelParams::initial(Architecture::mlp(2, {4, 3}, 2, Head::kReferenceClass), seed);
        const LossGrad lg = loss_and_grad(p, b);
        const Eigen::VectorXd fd = oracles::fd_gradient5(
            [&](const Eigen::VectorXd& t) { return mean_loss(ModelParams{p.arch, t}, b); },
            p.theta, 1e-3);
        EXPECT_LE((lg.grad - fd).norm() / std::max(1.0, fd.norm()), 1e-5) << "seed " << seed;
    }
}

TEST(LossAndGrad, ErrorsAreTyped)
{
    const ModelParams p = ModelParams::zeros(Architecture::linear(2, 2));
    EXPECT_THROW(loss_and_grad(p, Batch{}), ConfigError);
    Rng rng(1);
    const Batch wrong_dim = random_batch(rng, 3, 3, 2);
    EXPECT_THROW(loss_and_grad(p, wrong_dim), ConfigError);
    Batch bad_label = random_batch(rng, 3, 2, 2);
    bad_label.y[1] = 5;
    EXPECT_THROW(loss_and_grad(p, bad_label), ConfigError);

    ModelParams nan = p;
    nan.theta[3] = std::numeric_limits<double>::quiet_NaN();
    const Batch ok = random_batch(rng, 3, 2, 2);
    try
    {
        loss_and_grad(nan, ok);
        FAIL() << "expected NumericError";
    }
    catch (const NumericError& e)
    {
        EXPECT_EQ(e.index(), 3);
    }
}

TEST(LossAndGrad, LossNonNegativeAndDeterministic)
{
    Rng rng(5);
    const Batch b = random_batch(rng, 200, 4, 3);
    ModelParams p = ModelParams::initial(Architecture::mlp(4, {6}, 3), 5);
    p.theta *= 20.0;
    const LossGrad a = loss_and_grad(p, b);
    const LossGrad c = loss_and_grad(p, b);
    EXPECT_GE(a.loss, 0.0);
    EXPECT_TRUE(std::isfinite(a.loss));
    EXPECT_EQ(a.loss, c.loss);
    EXPECT_TRUE(a.grad == c.grad);
}

TEST(SoftmaxCrossEntropy, ProbabilitiesSumToOne)
{
    Rng rng(2);
    Eigen::VectorXd probs;
    for (int t = 0; t < 100; ++t)
    {
        const Eigen::VectorXd logits = testing::random_vector(rng, 5, 50.0);
        const double loss = softmax_cross_entropy(logits, t % 5, probs);
        EXPECT_NEAR(probs.sum(), 1.0, 1e-12);
        EXPECT_GE(loss, 0.0);
    }
}

TEST(DomainStats, IdenticalDomainsGiveIdenticalRows)
{
    Rng rng(4);
    const Batch b = random_batch(rng, 20, 3, 2);
    const DomainDataset data(3, 2, {b, b});
    const ModelParams p = ModelParams::initial(Architecture::mlp(3, {4}, 2), 4);
    const GradientSet gs = domain_stats(p, data);
    EXPECT_EQ(gs.losses[0], gs.losses[1]);
    EXPECT_TRUE(gs.grads.row(0) == gs.grads.row(1));
}

TEST(DomainStats, SizeWeightedRowsEqualPooled)
{
    const DomainDataset data = random_dataset(9, {13, 70, 5}, 3, 2);
    ModelParams p = ModelParams::zeros(Architecture::linear(3, 2, Head::kReferenceClass));
    Rng rng(9);
    p.theta = testing::random_vector(rng, p.theta.size());
    const GradientSet gs = domain_stats(p, data);
    const LossGrad pooled = loss_and_grad(p, data.pooled());
    double loss = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.theta.size());
    const double total = static_cast<double>(data.total());
    for (int i = 0; i < data.num_domains(); ++i)
    {
        const double w = data.sizes()[static_cast<std::size_t>(i)] / total;
        loss += w * gs.losses[i];
        grad += w * gs.grads.row(i).transpose();
    }
    EXPECT_NEAR(loss, pooled.loss, 1e-12);
    EXPECT_LE((grad - pooled.grad).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(DomainStats, NoiseSimpleAtZeroIsLn2)
{
    SynthTask task;
    task.kind = TaskKind::kNoiseSimple;
    const TaskData d = make_task(task);
    const ModelParams p =
        ModelParams::zeros(Architecture::linear(2, 2, Head::kReferenceClass));
    const GradientSet gs = domain_stats(p, d.train);
    for (int i = 0; i < gs.domains(); ++i)
    {
        EXPECT_NEAR(gs.losses[i], std::numbers::ln2, 1e-15);
    }
}

TEST(DomainStats, EmptyDomainIsNamed)
{
    Rng rng(1);
    const DomainDataset data(2, 2, {random_batch(rng, 3, 2, 2), Batch{}}, {"full", "hollow"});
    const ModelParams p = ModelParams::zeros(Architecture::linear(2, 2));
    try
    {
        domain_stats(p, data);
        FAIL() << "expected DataError";
    }
    catch (const DataError& e)
    {
        EXPECT_NE(std::string(e.what()).find("hollow"), std::string::npos) << e.what();
    }
}

TEST(DomainStats, MinibatchIsDeterministic)
{
    const DomainDataset data = random_dataset(2, {50, 60}, 2, 2);
    const ModelParams p = ModelParams::initial(Architecture::linear(2, 2), 2);
    const Sampling s = Sampling::minibatch(8, 17, 3);
    const GradientSet a = domain_stats(p, data, s);
    const GradientSet b = domain_stats(p, data, s);
    EXPECT_TRUE(a.losses == b.losses);
    EXPECT_TRUE(a.grads == b.grads);
}

TEST(ScaleGradient, Examples)
{
    const Eigen::VectorXd out = scale_gradient(Eigen::Vector2d(3.0, 4.0), 4.0, 0.5);
    EXPECT_NEAR(out[0], 1.2, 1e-15);
    EXPECT_NEAR(out[1], 1.6, 1e-15);
    EXPECT_TRUE(scale_gradient(Eigen::Vector2d::Zero(), 3.0, 0.5).isZero(0.0));
    EXPECT_TRUE(scale_gradient(Eigen::Vector2d(1.0, -2.0), 0.0, 0.5).isZero(0.0));
    EXPECT_THROW(scale_gradient(Eigen::Vector2d(1.0, 0.0), 1.0, -1.0), ConfigError);
    EXPECT_THROW(scale_gradient(Eigen::Vector2d(1.0, 0.0), -1.0, 0.5), ConfigError);
}

TEST(ScaleGradient, NormEqualsLossPower)
{
    Rng rng(8);
    for (int t = 0; t < 200; ++t)
    {
        const Eigen::VectorXd g = testing::random_vector(rng, 6, std::exp(4.0 * rng.normal()));
        const double loss = 3.0 * rng.uniform();
        const double p = 2.0 * rng.uniform();
        EXPECT_NEAR(scale_gradient(g, loss, p).norm(), std::pow(loss, p), 1e-12);
    }
}

TEST(FdGradient, Examples)
{
    const Eigen::VectorXd sq =
        fd_gradient([](const Eigen::VectorXd& t) { return t.squaredNorm(); },
                    Eigen::Vector2d(1.0, 2.0), 1e-6);
    EXPECT_NEAR(sq[0], 2.0, 1e-6);
    EXPECT_NEAR(sq[1], 4.0, 1e-6);
    const Eigen::Vector3d a(0.5, -2.0, 3.0);
    const Eigen::VectorXd lin =
        fd_gradient([&](const Eigen::VectorXd& t) { return a.dot(t); },
                    Eigen::Vector3d(0.1, 0.2, 0.3), 1e-3);
    EXPECT_LE((lin - a).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_THROW(fd_gradient([](const Eigen::VectorXd&) { return 0.0; },
                             Eigen::Vector2d::Zero(), 0.0),
                 ConfigError);
}

TEST(Evaluate, ZeroParamsPredictFirstClass)
{
    Rng rng(6);
    const Batch b = random_batch(rng, 40, 2, 2);
    const DomainDataset data(2, 2, {b});
    const DomainMetrics m =
        evaluate(ModelParams::zeros(Architecture::linear(2, 2)), data);
    double zeros = 0.0;
    for (int y : b.y)
    {
        zeros += y == 0 ? 1.0 : 0.0;
    }
    EXPECT_DOUBLE_EQ(m.accuracy[0], zeros / 40.0);
    EXPECT_NEAR(m.loss[0], std::numbers::ln2, 1e-15);
}

}  // namespace
}  // namespace domainshift
