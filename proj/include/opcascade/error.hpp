#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace opcascade {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or mismatched dimensions.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An operation was called outside its documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Non-finite input or a degenerate numeric state (e.g. a zero-norm persona).
class NumericalError : public Error {
public:
    using Error::Error;
};

// Embedding / emotion / text provider failed; the engine rolls the round back.
class ProviderError : public Error {
public:
    using Error::Error;
};

// Pearson correlation of a constant series.
class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

struct Issue {
    std::string path;
    std::string message;

    bool operator==(const Issue&) const = default;
};

// Semantic validation failure carrying every violation found, not only the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Issue> issues)
        : Error(summarize(issues)), issues_(std::move(issues)) {}

    const std::vector<Issue>& issues() const noexcept { return issues_; }

private:
    static std::string summarize(const std::vector<Issue>& issues) {
        std::string out = std::to_string(issues.size()) + " validation error(s)";
        for (const auto& issue : issues) {
            out += "\n  ";
            out += issue.path;
            out += ": ";
            out += issue.message;
        }
        return out;
    }

    std::vector<Issue> issues_;
};

// Malformed document. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error("parse error at line " + std::to_string(line) + ", column " +
                std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace opcascade
