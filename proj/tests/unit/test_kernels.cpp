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

#include "domainshift/kernels/loss_kernels.hpp"
#include "domainshift/model/params.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <omp.h>

namespace domainshift
{
namespace
{

struct KernelCase
{
    Batch batch;
    ModelParams params;
};

KernelCase make_case(std::uint64_t seed, int n, Head head)
{
    Rng rng(seed);
    KernelCase c{testing::random_batch(rng, n, 5, 3),
                 ModelParams::initial(Architecture::mlp(5, {8}, 3, head), seed)};
    return c;
}

class KernelSizes : public ::testing::TestWithParam<int>
{
};

TEST_P(KernelSizes, ParallelMatchesSerial)
{
    for (Head head : {Head::kSoftmax, Head::kReferenceClass})
    {
        const KernelCase c = make_case(31, GetParam(), head);
        const auto& x = c.batch.x;
        const auto& y = c.batch.y;
        const LossGrad s = kernels::sum_loss_grad_serial(c.params, x, y);
        const LossGrad p = kernels::sum_loss_grad_parallel(c.params, x, y);
        EXPECT_NEAR(s.loss, p.loss, 1e-12 * std::max(1.0, std::abs(s.loss)));
        EXPECT_LE((s.grad - p.grad).norm(), 1e-12 * std::max(1.0, s.grad.norm()));
        EXPECT_NEAR(kernels::sum_loss_serial(c.params, x, y),
                    kernels::sum_loss_parallel(c.params, x, y),
                    1e-12 * std::max(1.0, std::abs(s.loss)));
        EXPECT_DOUBLE_EQ(kernels::sum_loss_serial(c.params, x, y), s.loss);
        const RowMatrix gs = kernels::input_grad_rows_serial(c.params, x, y);
        const RowMatrix gp = kernels::input_grad_rows_parallel(c.params, x, y);
        // Rows are independent, so there is no reduction to reorder.
        EXPECT_TRUE(gs == gp);
        EXPECT_EQ(kernels::count_correct(c.params, x, y, Exec::kSerial),
                  kernels::count_correct(c.params, x, y, Exec::kParallel));
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, KernelSizes, ::testing::Values(1, 63, 64, 65, 1000));

TEST(Kernels, SmallBatchIsBitwiseSerial)
{
    // A single chunk is summed in example order, like the serial loop.
    const KernelCase c = make_case(3, static_cast<int>(kernels::kChunkRows), Head::kSoftmax);
    const LossGrad s = kernels::sum_loss_grad_serial(c.params, c.batch.x, c.batch.y);
    const LossGrad p = kernels::sum_loss_grad_parallel(c.params, c.batch.x, c.batch.y);
    EXPECT_EQ(s.loss, p.loss);
    EXPECT_TRUE(s.grad == p.grad);
}

TEST(Kernels, ParallelIsIndependentOfThreadCount)
{
    const KernelCase c = make_case(17, 1500, Head::kReferenceClass);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const LossGrad one = kernels::sum_loss_grad_parallel(c.params, c.batch.x, c.batch.y);
    for (int threads : {2, 3, 8})
    {
        omp_set_num_threads(threads);
        const LossGrad many =
            kernels::sum_loss_grad_parallel(c.params, c.batch.x, c.batch.y);
        EXPECT_EQ(one.loss, many.loss) << threads << " threads";
        EXPECT_TRUE(one.grad == many.grad) << threads << " threads";
    }
    omp_set_num_threads(saved);
}

TEST(Kernels, DispatchFollowsExec)
{
    const KernelCase c = make_case(5, 300, Head::kSoftmax);
    const LossGrad s = kernels::sum_loss_grad(c.params, c.batch.x, c.batch.y, Exec::kSerial);
    const LossGrad ref = kernels::sum_loss_grad_serial(c.params, c.batch.x, c.batch.y);
    EXPECT_EQ(s.loss, ref.loss);
    EXPECT_TRUE(s.grad == ref.grad);
    const LossGrad p =
        kernels::sum_loss_grad(c.params, c.batch.x, c.batch.y, Exec::kParallel);
    const LossGrad pref = kernels::sum_loss_grad_parallel(c.params, c.batch.x, c.batch.y);
    EXPECT_EQ(p.loss, pref.loss);
    EXPECT_TRUE(p.grad == pref.grad);
}

}  // namespace
}  // namespace domainshift
