// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <stdexcept>
#include <string>

namespace railrelay {

/// Raised when an argument lies outside the domain of a model function.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed or inconsistent scenario/experiment configuration.
/// `line()` is 0 when the problem is not tied to a particular input line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// The data floor cannot be met within the per-segment power budget.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace railrelay
