#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace simm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ValidationCode {
    InvalidArgument,
    DimensionMismatch,
    NegativeSd,
    InvalidConcentration,
    NonFinite,
    UnknownTracer,
    MissingColumn,
    DuplicateName,
    EmptyGroup,
    TooFewSources,
    UnknownSource,
    UnknownGroup,
    FileNotFound,
    Parse,
};

std::string_view to_string(ValidationCode code);

/// Bad user input. The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    ValidationError(ValidationCode code, const std::string& message)
        : Error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ValidationCode code() const noexcept { return code_; }

private:
    ValidationCode code_;
};

/// Malformed document. `offset` is the byte position where parsing failed.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& message, std::size_t offset)
        : ValidationError(ValidationCode::Parse,
                          message + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class InitializationError : public Error {
public:
    InitializationError(const std::string& message, int retries)
        : Error(message + " after " + std::to_string(retries) + " retries"), retries_(retries) {}

    int retries() const noexcept { return retries_; }

private:
    int retries_;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A run artifact written with a schema this build cannot read.
class SchemaVersionError : public Error {
public:
    SchemaVersionError(int found, int expected)
        : Error("run artifact schema_version " + std::to_string(found) +
                " is not supported (expected " + std::to_string(expected) +
                "); re-run `simm fit` or migrate the artifact"),
          found_(found) {}

    int found() const noexcept { return found_; }

private:
    int found_;
};

}  // namespace simm
