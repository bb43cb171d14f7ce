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

#include <cstdlib>
#include <iostream>

int main()
{
    domainshift::checks::AcceptanceOptions opt;
    if (const char* t = std::getenv("DOMAINSHIFT_THREADS"))
    {
        opt.threads = std::atoi(t);
    }
    const auto results = domainshift::checks::run_acceptance(
        opt, [](const domainshift::checks::CriterionResult& r) {
            std::cout << domainshift::checks::format_criterion(r) << std::endl;
        });
    int failed = 0;
    for (const auto& r : results)
    {
        failed += r.passed ? 0 : 1;
    }
    std::cout << "acceptance: " << results.size() - static_cast<std::size_t>(failed) << "/"
              << results.size() << " criteria pass" << std::endl;
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
