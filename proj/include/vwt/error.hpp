#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace vwt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (manifest JSON, Java source, CSV, records).
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t line = 0, std::size_t column = 0)
        : Error(line == 0 ? message
                          : message + " (line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A manifest entry violates one of its invariants.
class ValidationError : public Error {
public:
    ValidationError(std::string entry_id, std::string field, const std::string& message)
        : Error("entry '" + entry_id + "', field '" + field + "': " + message),
          entry_id_(std::move(entry_id)),
          field_(std::move(field)) {}

    const std::string& entry_id() const noexcept { return entry_id_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string entry_id_;
    std::string field_;
};

class LocatorError : public Error {
public:
    enum class Kind { not_found, ambiguous };

    LocatorError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The subprocess could not be started at all. A compilation failure is not
/// this error; it is an ERR verdict.
class ExecutionError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    ProviderError(const std::string& message, bool transient)
        : Error(message), transient_(transient) {}

    bool transient() const noexcept { return transient_; }

private:
    bool transient_;
};

class ReplayMissError : public Error {
public:
    ReplayMissError(std::string conversation_id, std::size_t ordinal, const std::string& detail)
        : Error("replay miss in conversation '" + conversation_id + "' at ordinal " +
                std::to_string(ordinal) + ": " + detail),
          conversation_id_(std::move(conversation_id)),
          ordinal_(ordinal) {}

    const std::string& conversation_id() const noexcept { return conversation_id_; }
    std::size_t ordinal() const noexcept { return ordinal_; }

private:
    std::string conversation_id_;
    std::size_t ordinal_;
};

} // namespace vwt
