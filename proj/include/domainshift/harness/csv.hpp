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

#include "domainshift/harness/metrics.hpp"

#include <cstddef>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace domainshift
{

/// RFC 4180 field: quoted when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_value(double v);

/// Header: run_id,seed,task,algorithm,domain,split,metric,value.
std::string csv_header();
std::string csv_line(const MetricRow& row);

/// Single serialized writer. Jobs may finish in any order; their rows are
/// emitted in job-index order, so the output does not depend on scheduling.
class CsvWriter
{
public:
    explicit CsvWriter(std::ostream& out);

    /// Queue the rows of job `index` (0-based). Each index is submitted once.
    void submit(std::size_t index, std::vector<MetricRow> rows);

    /// Jobs written so far.
    std::size_t written() const;

private:
    void flush_ready();

    std::ostream& out_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::map<std::size_t, std::vector<MetricRow>> pending_;
};

}  // namespace domainshift
