#pragma once

#include <stdexcept>
#include <string>

namespace netfolio {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Config,        ///< bad configuration or flags
    Parse,         ///< malformed input file
    Data,          ///< well-formed input violating a data invariant
    Size,          ///< requested size incompatible with the data
    Usage,         ///< API precondition violated by the caller
    Stage,         ///< missing upstream pipeline artifact
    Numerical,     ///< solver failed to converge or lost accuracy
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Invalid generator or model specification.
class SpecError : public Error {
public:
    explicit SpecError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class SizeError : public Error {
public:
    explicit SizeError(const std::string& what) : Error(ErrorKind::Size, what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class StageError : public Error {
public:
    explicit StageError(const std::string& what) : Error(ErrorKind::Stage, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace netfolio
