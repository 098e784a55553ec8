// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace amodal {

enum class ErrorKind {
    BadArgument,
    BadConfig,
    BadFixture,
    BackendRejected,
    BackendUnavailable,
    DegenerateWeights,
    DimMismatch,
    ExpansionTooLarge,
    IncompleteContext,
    IoError,
    MalformedResponse,
    NoOverlap,
    SchemaViolation,
    SynthesisFailed,
    TargetNotFound,
    TooSmall,
    UndefinedCorrelation,
};

const char* to_string(ErrorKind kind);

/// Every failure surfaced by the library carries a machine-checkable kind
/// and, for schema violations, the offending field path.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string field = {})
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          field_(std::move(field)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorKind kind_;
    std::string field_;
};

// Retryable transport failure (timeout, connect error, 5xx). The retry layer
// in service code converts an exhausted budget into Error(BackendUnavailable).
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& message, int status = 0)
        : std::runtime_error(message), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

}  // namespace amodal
