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

#include <cstddef>
#include <functional>

namespace domainshift
{

/// Runs fn(0) .. fn(n - 1) on up to `threads` worker threads (0 = hardware
/// concurrency). With more than one worker, each worker's OpenMP team is
/// limited to one thread. If any call throws, the exception of the lowest
/// failing index is rethrown after all workers stop.
void run_indexed(std::size_t n, int threads,
                 const std::function<void(std::size_t)>& fn);

}  // namespace domainshift
