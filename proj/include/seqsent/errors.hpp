#ifndef SEQSENT_ERRORS_HPP
#define SEQSENT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqsent {

// Precondition or shape violation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input file; carries the 1-based line number (0 when unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// NaN/Inf produced where a finite value is required.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model and data disagree (e.g. label sets).
class Mismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace seqsent

#endif  // SEQSENT_ERRORS_HPP
