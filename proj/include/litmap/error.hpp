// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace litmap {

enum class ErrorKind {
    EmptyTitle,
    IoFailure,
    MalformedRecord,
    NetworkFailure,
    RateLimited,
    MalformedFeed,
    MissingText,
    EmptyInput,
    ProviderUnavailable,
    BadDimension,
    TooFewPoints,
    KTooLarge,
    ZeroMean,
    Unclustered,
    ClassTooSmall,
    DegenerateInput,
    OneClassOnly,
    NotReady,
    UnknownDocument,
    EmptyQuery,
    NoModel,
    UnknownReport,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyTitle: return "EmptyTitle";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::MalformedRecord: return "MalformedRecord";
        case ErrorKind::NetworkFailure: return "NetworkFailure";
        case ErrorKind::RateLimited: return "RateLimited";
        case ErrorKind::MalformedFeed: return "MalformedFeed";
        case ErrorKind::MissingText: return "MissingText";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::BadDimension: return "BadDimension";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::KTooLarge: return "KTooLarge";
        case ErrorKind::ZeroMean: return "ZeroMean";
        case ErrorKind::Unclustered: return "Unclustered";
        case ErrorKind::ClassTooSmall: return "ClassTooSmall";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::OneClassOnly: return "OneClassOnly";
        case ErrorKind::NotReady: return "NotReady";
        case ErrorKind::UnknownDocument: return "UnknownDocument";
        case ErrorKind::EmptyQuery: return "EmptyQuery";
        case ErrorKind::NoModel: return "NoModel";
        case ErrorKind::UnknownReport: return "UnknownReport";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Single exception type for the library. `kind()` identifies the failure;
/// `location()` carries a line number (record files) or a byte offset (feeds)
/// when one applies.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::size_t> location = std::nullopt)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          location_(location) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> location() const noexcept { return location_; }

    bool retryable() const noexcept { return kind_ == ErrorKind::NetworkFailure; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> location_;
};

}  // namespace litmap
