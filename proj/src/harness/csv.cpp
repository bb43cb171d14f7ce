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

#include "domainshift/harness/csv.hpp"

#include "domainshift/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace domainshift
{

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
    {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
        {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string format_value(double v)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    if (std::isinf(v))
    {
        return v > 0 ? "inf" : "-inf";
    }
    return fmt::format("{}", v);
}

std::string csv_header()
{
    return "run_id,seed,task,algorithm,domain,split,metric,value";
}

std::string csv_line(const MetricRow& row)
{
    return fmt::format("{},{},{},{},{},{},{},{}", csv_field(row.run_id),
                       csv_field(row.seed), csv_field(row.task),
                       csv_field(row.algorithm), csv_field(row.domain),
                       csv_field(row.split), csv_field(row.metric),
                       format_value(row.value));
}

CsvWriter::CsvWriter(std::ostream& out) : out_(out)
{
    out_ << csv_header() << '\n';
}

void CsvWriter::submit(std::size_t index, std::vector<MetricRow> rows)
{
    std::lock_guard lock(mutex_);
    if (index < next_ || pending_.count(index) != 0)
    {
        throw ConfigError(fmt::format("CSV job {} submitted twice", index));
    }
    pending_.emplace(index, std::move(rows));
    flush_ready();
}

std::size_t CsvWriter::written() const
{
    std::lock_guard lock(mutex_);
    return next_;
}

void CsvWriter::flush_ready()
{
    for (auto it = pending_.find(next_); it != pending_.end();
         it = pending_.find(next_))
    {
        for (const MetricRow& row : it->second)
        {
            out_ << csv_line(row) << '\n';
        }
        pending_.erase(it);
        ++next_;
    }
    out_.flush();
}

}  // namespace domainshift
