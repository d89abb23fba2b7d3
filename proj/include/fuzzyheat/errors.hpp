#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fuzzyheat {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the set an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The caller combined arguments that cannot work together.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Input document or configuration violates its schema.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (non-finite values, divergence, growth caps).
class NumericalError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t offset, std::vector<std::string> expected = {})
        : Error(std::move(message)), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class EvaluationError : public Error {
public:
    EvaluationError(std::string message, std::string subexpression)
        : Error(std::move(message)), subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

}  // namespace fuzzyheat
