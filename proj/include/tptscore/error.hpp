#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tptscore {

enum class ErrorCode {
    UnknownCategory,
    EmptyHost,
    DuplicateId,
    InvalidRegex,
    InvalidPattern,
    MalformedUrl,
    CorruptStore,
    CorruptData,
    StoreIo,
    NotHar,
    MalformedJson,
    InvalidConfig,
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::EmptyHost: return "EmptyHost";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidRegex: return "InvalidRegex";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::MalformedUrl: return "MalformedUrl";
    case ErrorCode::CorruptStore: return "CorruptStore";
    case ErrorCode::CorruptData: return "CorruptData";
    case ErrorCode::StoreIo: return "StoreIo";
    case ErrorCode::NotHar: return "NotHar";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Base exception for every failure raised by the library. The code is
/// stable and meant for dispatch; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

} // namespace tptscore
