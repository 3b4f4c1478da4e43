#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in a rule or fact source, with 1-based line/column.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          m_line(line), m_column(column) {}

    std::size_t line() const noexcept { return m_line; }
    std::size_t column() const noexcept { return m_column; }

private:
    std::size_t m_line;
    std::size_t m_column;
};

class ArityError : public Error {
public:
    using Error::Error;
};

class RangeRestrictionError : public Error {
public:
    using Error::Error;
};

class ResourceLimitError : public Error {
public:
    using Error::Error;
};

class GoalNotDerivableError : public Error {
public:
    using Error::Error;
};

class UnknownNodeError : public Error {
public:
    using Error::Error;
};

/// Structured-document validation failure (ontology, alerts, configuration).
class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace lagraph
