#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kgcounsel {

// Every failure the engine raises derives from Error and carries a stable
// machine-readable code alongside the human message.
enum class ErrorCode {
    DuplicateId,
    EmptyLabel,
    MissingEndpoint,
    KindViolation,
    DuplicateEdge,
    ParseError,
    ValidationError,
    EmptyQuery,
    InvariantError,
    EmptyText,
    InvalidArgument,
    DimMismatch,
    ZeroVector,
    EmptyMatrix,
    EmptyIndex,
    ProviderError,
    DimDrift,
    UnknownTemplate,
    ClientError,
    Timeout,
    MissingCategory,
    UnmatchedModel,
    ConfigError,
    IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Line-numbered parse failure (1-based; 0 when the input is not line oriented).
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line = 0)
        : Error(ErrorCode::ParseError,
                line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Raised by remote/mock providers. `retryable` drives the retry loops.
class ProviderError : public Error {
public:
    ProviderError(const std::string& message, int status = 0, bool retryable = true,
                  int attempts = 1)
        : Error(ErrorCode::ProviderError, message),
          status_(status), retryable_(retryable), attempts_(attempts) {}

    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }
    int attempts() const noexcept { return attempts_; }

private:
    int status_;
    bool retryable_;
    int attempts_;
};

class ClientError : public Error {
public:
    ClientError(const std::string& message, int status = 0, int attempts = 1)
        : Error(ErrorCode::ClientError, message), status_(status), attempts_(attempts) {}

    int status() const noexcept { return status_; }
    int attempts() const noexcept { return attempts_; }
    // 5xx and transport failures (status 0) are worth another attempt.
    bool retryable() const noexcept { return status_ == 0 || status_ >= 500; }

private:
    int status_;
    int attempts_;
};

class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& message) : Error(ErrorCode::Timeout, message) {}
};

}  // namespace kgcounsel
