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
#include <stdexcept>
#include <string>

namespace domainshift
{

/// Invalid or inconsistent configuration (dimension mismatch, bad ranges).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite value showed up during a numeric computation.
class NumericError : public std::runtime_error
{
public:
    explicit NumericError(const std::string& what,
                          std::ptrdiff_t index = -1)
        : std::runtime_error(what), index_(index)
    {
    }

    /// Offending parameter index, or -1 when not attributable to one.
    std::ptrdiff_t index() const noexcept { return index_; }

private:
    std::ptrdiff_t index_;
};

/// Input is valid but too degenerate for the requested operation.
class DegenerateInputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Dataset-level problems such as an empty domain.
class DataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Training loss exceeded the divergence threshold.
class DivergenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

}  // namespace domainshift
