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
#include "domainshift/rng.hpp"

#include <benchmark/benchmark.h>

namespace
{

using namespace domainshift;

struct Workload
{
    ModelParams params;
    RowMatrix x;
    std::vector<int> y;
};

Workload make_workload(std::int64_t rows, std::int64_t hidden)
{
    constexpr int kFeatures = 16;
    constexpr int kClasses = 4;
    Rng rng(1);
    Workload w;
    const std::vector<int> layers =
        hidden > 0 ? std::vector<int>{static_cast<int>(hidden)} : std::vector<int>{};
    w.params = ModelParams::initial(Architecture::mlp(kFeatures, layers, kClasses), 1);
    for (Eigen::Index i = 0; i < w.params.theta.size(); ++i)
    {
        w.params.theta[i] += 0.1 * rng.normal();
    }
    w.x.resize(rows, kFeatures);
    for (Eigen::Index i = 0; i < w.x.size(); ++i)
    {
        w.x.data()[i] = rng.normal();
    }
    for (std::int64_t i = 0; i < rows; ++i)
    {
        w.y.push_back(static_cast<int>(rng.below(kClasses)));
    }
    return w;
}

template <Exec E>
void BM_LossGrad(benchmark::State& state)
{
    const Workload w = make_workload(state.range(0), state.range(1));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(kernels::sum_loss_grad(w.params, w.x, w.y, E));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void BM_InputGrad(benchmark::State& state)
{
    const Workload w = make_workload(state.range(0), state.range(1));
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(kernels::input_grad_rows(w.params, w.x, w.y, E));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void sizes(benchmark::internal::Benchmark* b)
{
    for (std::int64_t rows : {1000, 100000})
    {
        for (std::int64_t hidden : {0, 64})
        {
            b->Args({rows, hidden});
        }
    }
    b->ArgNames({"rows", "hidden"})->UseRealTime();
}

BENCHMARK(BM_LossGrad<Exec::kSerial>)->Apply(sizes);
BENCHMARK(BM_LossGrad<Exec::kParallel>)->Apply(sizes);
BENCHMARK(BM_InputGrad<Exec::kSerial>)->Apply(sizes);
BENCHMARK(BM_InputGrad<Exec::kParallel>)->Apply(sizes);

}  // namespace

BENCHMARK_MAIN();
