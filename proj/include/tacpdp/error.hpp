#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tacpdp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input row. `line()` is 1-based and counts the header row.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Same (project, version) seen with two different release dates.
class ConflictError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or violated operation precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Feature value outside the domain of a transform (e.g. negative under log(1+x)).
class DomainError : public Error {
public:
    DomainError(std::size_t attribute, std::size_t row, const std::string& what)
        : Error(what + " (attribute " + std::to_string(attribute) + ", row " + std::to_string(row) + ")"),
          attribute_(attribute), row_(row) {}

    std::size_t attribute() const noexcept { return attribute_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t attribute_;
    std::size_t row_;
};

/// A treatment removed every attribute or every training instance.
class DegenerateTreatmentError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class PredictionError : public Error {
public:
    using Error::Error;
};

/// Class balancing impossible (single-class training data).
class BalancingError : public Error {
public:
    using Error::Error;
};

}  // namespace tacpdp
