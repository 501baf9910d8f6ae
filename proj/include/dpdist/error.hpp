#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpdist {

// Bad caller input: invalid sizes, out-of-range fractions, unknown kinds.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Problems with input data: malformed files, empty or degenerate geometry.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Wrong magic bytes, unsupported version, shape mismatch in a model archive.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

// Truncated archive or checksum mismatch.
class IntegrityError : public DataError {
public:
    using DataError::DataError;
};

class EmptyInputError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateError : public DataError {
public:
    using DataError::DataError;
};

// Non-finite values during training or evaluation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dpdist
