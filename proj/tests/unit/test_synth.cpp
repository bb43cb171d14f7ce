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
#include "domainshift/synth/synth.hpp"
#include "helpers.hpp"
#include "oracles/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace domainshift
{
namespace
{

int clean_label(const RowMatrix& x, Eigen::Index i) { return x(i, 0) + x(i, 1) > 0.0 ? 1 : 0; }

TEST(DgExample, NoiseFreeMatchedSigns)
{
    DgSpec spec;
    spec.beta = Eigen::MatrixXd::Constant(1, 1, 1.0);
    spec.sigma = {0.0};
    spec.n = {200};
    const DomainDataset d = gen_dg_example(spec, 1);
    const Batch& b = d.domain(0);
    for (std::size_t i = 0; i < b.size(); ++i)
    {
        const double s = b.y[i] == 1 ? 1.0 : -1.0;
        EXPECT_EQ(b.x(static_cast<Eigen::Index>(i), 0), s);
        EXPECT_EQ(b.x(static_cast<Eigen::Index>(i), 1), s);
    }
}

TEST(DgExample, NoiseFreeNegativeBeta)
{
    DgSpec spec;
    spec.beta = Eigen::MatrixXd::Constant(1, 1, -4.0);
    spec.sigma = {0.0};
    spec.n = {100};
    const DomainDataset d = gen_dg_example(spec, 2);
    const Batch& b = d.domain(0);
    int positives = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
    {
        if (b.y[i] == 1)
        {
            ++positives;
            EXPECT_EQ(b.x(static_cast<Eigen::Index>(i), 0), 1.0);
            EXPECT_EQ(b.x(static_cast<Eigen::Index>(i), 1), -4.0);
        }
    }
    EXPECT_GT(positives, 0);
}

TEST(DgExample, PerDomainLogisticSignPattern)
{
    DgSpec spec;
    spec.beta.resize(3, 1);
    spec.beta << -1.0, 2.0, -4.0;
    spec.sigma = {0.2, 0.5, 0.4};
    spec.n = {20000, 20000, 20000};
    const DomainDataset d = gen_dg_example(spec, 3);
    for (int i = 0; i < 3; ++i)
    {
        const Batch& b = d.domain(i);
        const Eigen::VectorXd w = oracles::logistic_fit(testing::dense(b.x), b.y, 1e-3);
        EXPECT_GT(w[0], 0.0) << "domain " << i;
        EXPECT_EQ(std::signbit(w[1]), std::signbit(spec.beta(i, 0))) << "domain " << i;
    }
}

TEST(DgExample, InvalidSpecThrows)
{
    DgSpec spec;
    spec.beta = Eigen::MatrixXd::Constant(2, 1, 1.0);
    spec.sigma = {0.1};
    spec.n = {10, 10};
    EXPECT_THROW(gen_dg_example(spec, 0), ConfigError);
}

SynthTask task_of(TaskKind kind, std::uint64_t seed = 0)
{
    SynthTask t;
    t.kind = kind;
    t.seed = seed;
    return t;
}

TEST(NoiseSimple, ExactFlipFraction)
{
    const TaskData d = make_task(task_of(TaskKind::kNoiseSimple, 4));
    ASSERT_EQ(d.train.sizes(), (std::vector<int>{450, 450, 100}));
    EXPECT_EQ(d.train.name(0), "Noisy-Majority");
    for (int dom = 0; dom < 3; ++dom)
    {
        const Batch& b = d.train.domain(dom);
        int flipped = 0;
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            flipped += b.y[i] != clean_label(b.x, static_cast<Eigen::Index>(i)) ? 1 : 0;
        }
        EXPECT_EQ(flipped, dom == 0 ? 90 : 0) << "domain " << dom;
    }
    const Batch& test0 = d.test.domain(0);
    for (std::size_t i = 0; i < test0.size(); ++i)
    {
        EXPECT_EQ(test0.y[i], clean_label(test0.x, static_cast<Eigen::Index>(i)));
    }
}

TEST(NoiseSimple, NoisyTestOption)
{
    SynthTask t = task_of(TaskKind::kNoiseSimple, 5);
    t.noisy_test = true;
    const TaskData d = make_task(t);
    const Batch& b = d.test.domain(0);
    int flipped = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
    {
        flipped += b.y[i] != clean_label(b.x, static_cast<Eigen::Index>(i)) ? 1 : 0;
    }
    EXPECT_EQ(flipped, 200);
}

TEST(NoiseSimple, ZeroFlipRateIsClean)
{
    SynthTask t = task_of(TaskKind::kNoiseSimple, 6);
    t.flip_rate = 0.0;
    const TaskData d = make_task(t);
    for (int dom = 0; dom < 3; ++dom)
    {
        const Batch& b = d.train.domain(dom);
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            EXPECT_EQ(b.y[i], clean_label(b.x, static_cast<Eigen::Index>(i)));
        }
    }
}

TEST(NoiseSimple, CleanLogisticFitRecoversDiagonal)
{
    SynthTask t = task_of(TaskKind::kNoiseSimple, 7);
    t.sizes = {100, 100000, 100};
    const TaskData d = make_task(t);
    const Batch& b = d.train.domain(1);
    const Eigen::VectorXd w = oracles::logistic_fit(testing::dense(b.x), b.y, 1e-3);
    const Eigen::Vector2d dir = w.head(2).normalized();
    const double angle = std::acos(std::clamp(dir.dot(Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0)),
                                              -1.0, 1.0)) *
                         180.0 / std::numbers::pi;
    EXPECT_LT(angle, 5.0);
}

TEST(RotationSimple, LabelExamples)
{
    auto label = [](int dom, double x1, double x2) {
        return kRotationWeights[dom][0] * x1 + kRotationWeights[dom][1] * x2 > 0.0 ? 1 : 0;
    };
    for (int dom = 0; dom < 3; ++dom)
    {
        EXPECT_EQ(label(dom, 1.0, 0.0), 1);
    }
    EXPECT_EQ(label(0, 0.0, 1.0), 0);
    EXPECT_EQ(label(1, 0.0, 1.0), 1);
    EXPECT_EQ(label(2, 0.0, 1.0), 1);
    EXPECT_EQ(label(0, -0.5, 1.0), 0);
    EXPECT_EQ(label(1, -0.5, 1.0), 1);
    EXPECT_EQ(label(2, -0.5, 1.0), 1);

    const TaskData d = make_task(task_of(TaskKind::kRotationSimple, 8));
    ASSERT_EQ(d.train.sizes(), (std::vector<int>{499, 499, 2}));
    for (const DomainDataset* split : {&d.train, &d.test})
    {
        for (int dom = 0; dom < 3; ++dom)
        {
            const Batch& b = split->domain(dom);
            for (std::size_t i = 0; i < b.size(); ++i)
            {
                const auto r = static_cast<Eigen::Index>(i);
                EXPECT_EQ(b.y[i], label(dom, b.x(r, 0), b.x(r, 1)));
            }
        }
    }
}

TEST(SpuriousSimple, FeatureConstruction)
{
    const TaskData d = make_task(task_of(TaskKind::kSpuriousSimple, 9));
    ASSERT_EQ(d.train.sizes(), (std::vector<int>{490, 490, 20}));
    const Batch& reversed = d.train.domain(2);
    for (std::size_t i = 0; i < reversed.size(); ++i)
    {
        if (reversed.y[i] == 1)
        {
            EXPECT_EQ(reversed.x(static_cast<Eigen::Index>(i), 2), 0.0);
        }
    }
    auto agreement = [](const Batch& b) {
        int agree = 0;
        for (std::size_t i = 0; i < b.size(); ++i)
        {
            agree += b.x(static_cast<Eigen::Index>(i), 2) == b.y[i] ? 1 : 0;
        }
        return agree;
    };
    EXPECT_NEAR(agreement(d.train.domain(1)) / 490.0, 0.6, 0.02);
    int total = 0;
    for (int dom = 0; dom < 3; ++dom)
    {
        total += agreement(d.train.domain(dom));
    }
    EXPECT_NEAR(total / 1000.0, 0.8, 0.03);

    // Domain 0: x3 always agrees, (x1, x2) agree for 60% of the examples.
    const Batch& corrupted = d.train.domain(0);
    EXPECT_EQ(agreement(corrupted), 490);
    int predictive = 0;
    for (std::size_t i = 0; i < corrupted.size(); ++i)
    {
        predictive += corrupted.y[i] == clean_label(corrupted.x, static_cast<Eigen::Index>(i)) ? 1 : 0;
    }
    EXPECT_EQ(predictive, 294);
}

TEST(Generators, DeterministicAndSized)
{
    for (TaskKind kind : {TaskKind::kDgExample, TaskKind::kNoiseSimple,
                          TaskKind::kRotationSimple, TaskKind::kSpuriousSimple})
    {
        const SynthTask t = task_of(kind, 11);
        const TaskData a = make_task(t);
        const TaskData b = make_task(t);
        std::ostringstream sa;
        std::ostringstream sb;
        write_dataset_csv(sa, a.train);
        write_dataset_csv(sb, b.train);
        EXPECT_EQ(sa.str(), sb.str()) << to_string(kind);
        EXPECT_EQ(a.train.sizes(), t.train_sizes()) << to_string(kind);
        for (int dom = 0; dom < a.test.num_domains(); ++dom)
        {
            EXPECT_EQ(a.test.domain(dom).size(), 1000U);
        }
        const TaskData c = make_task(task_of(kind, 12));
        EXPECT_FALSE(c.train.domain(0).x == a.train.domain(0).x) << to_string(kind);
        EXPECT_EQ(parse_task(to_string(kind)), kind);
    }
    EXPECT_THROW(parse_task("mnist"), ConfigError);
}

TEST(Generators, LabelBalance)
{
    for (TaskKind kind : {TaskKind::kDgExample, TaskKind::kNoiseSimple,
                          TaskKind::kSpuriousSimple})
    {
        const TaskData d = make_task(task_of(kind, 13));
        for (const DomainDataset* split : {&d.train, &d.test})
        {
            for (int dom = 0; dom < split->num_domains(); ++dom)
            {
                const Batch& b = split->domain(dom);
                if (b.size() < 100)
                {
                    continue;
                }
                double ones = 0.0;
                for (int y : b.y)
                {
                    ones += y;
                }
                const double n = static_cast<double>(b.size());
                EXPECT_LE(std::abs(ones / n - 0.5), 3.0 / std::sqrt(n))
                    << to_string(kind) << " domain " << dom;
            }
        }
    }
}

TEST(Generators, CsvLayout)
{
    const TaskData d = make_task(task_of(TaskKind::kRotationSimple, 1));
    std::ostringstream s;
    write_dataset_csv(s, d.train);
    std::istringstream in(s.str());
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x1,x2,y,d");
    int lines = 0;
    for (std::string line; std::getline(in, line);)
    {
        ++lines;
    }
    EXPECT_EQ(lines, 1000);
}

}  // namespace
}  // namespace domainshift
