#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbtv {

enum class ErrorKind {
    InvalidParam,
    InvalidPmf,
    LengthMismatch,
    NotDominating,
    NotUnimodal,
    NonPositiveMass,
    EmptyVector,
    EmptyPart,
    BadPartition,
    BadSplit,
    SupportTooLarge,
    TooLarge,
    TooLargeForBruteforce,
    BadGrid,
    BadConfig,
    UnknownSuite,
    IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParam: return "InvalidParam";
        case ErrorKind::InvalidPmf: return "InvalidPmf";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::NotDominating: return "NotDominating";
        case ErrorKind::NotUnimodal: return "NotUnimodal";
        case ErrorKind::NonPositiveMass: return "NonPositiveMass";
        case ErrorKind::EmptyVector: return "EmptyVector";
        case ErrorKind::EmptyPart: return "EmptyPart";
        case ErrorKind::BadPartition: return "BadPartition";
        case ErrorKind::BadSplit: return "BadSplit";
        case ErrorKind::SupportTooLarge: return "SupportTooLarge";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::TooLargeForBruteforce: return "TooLargeForBruteforce";
        case ErrorKind::BadGrid: return "BadGrid";
        case ErrorKind::BadConfig: return "BadConfig";
        case ErrorKind::UnknownSuite: return "UnknownSuite";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Single exception type for the library; inspect kind() to dispatch.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace pbtv
