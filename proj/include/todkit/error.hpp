#pragma once

#include <stdexcept>
#include <string>

namespace todkit {

/// Base for every error raised by the library. Violations found by the
/// validator are data, not exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedDocument : public Error {
public:
    using Error::Error;
};

/// Invariant breach in a loaded document; what() carries the path to the
/// offending field.
class SchemaViolation : public Error {
public:
    SchemaViolation(std::string path, const std::string& message)
        : Error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class AmbiguousIntent : public Error {
public:
    using Error::Error;
};

/// Raised when text contains the call prefix but no well-formed call follows.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ContractViolation : public Error {
public:
    using Error::Error;
};

class EmptyDialog : public Error {
public:
    using Error::Error;
};

class ExemplarGenerationFailed : public Error {
public:
    ExemplarGenerationFailed(const std::string& message, std::string last_completion)
        : Error(message), last_completion_(std::move(last_completion)) {}
    const std::string& last_completion() const noexcept { return last_completion_; }

private:
    std::string last_completion_;
};

enum class BackendErrorKind { Unreachable, Unauthorized, RateLimited, Truncated };

const char* to_string(BackendErrorKind kind) noexcept;

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& message)
        : Error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}
    BackendErrorKind kind() const noexcept { return kind_; }

private:
    BackendErrorKind kind_;
};

class StuckDialog : public Error {
public:
    using Error::Error;
};

class EmptySystemText : public Error {
public:
    using Error::Error;
};

class UnsupportedRecord : public Error {
public:
    UnsupportedRecord(std::string file, std::size_t offset, const std::string& message)
        : Error(file + "@" + std::to_string(offset) + ": " + message),
          file_(std::move(file)), offset_(offset) {}
    const std::string& file() const noexcept { return file_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::string file_;
    std::size_t offset_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace todkit
