#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace eemimo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An iterative loop hit its iteration cap before meeting its tolerance.
class NoConvergence : public Error {
public:
    NoConvergence(std::string loop, std::size_t iterations, double residual)
        : Error(loop + ": no convergence after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          loop_(std::move(loop)), iterations_(iterations), residual_(residual) {}

    const std::string &loop() const noexcept { return loop_; }
    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::string loop_;
    std::size_t iterations_;
    double residual_;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class InstanceTooLarge : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string &message, std::size_t line = 0, std::string field = {})
        : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string &field() const noexcept { return field_; }

private:
    static std::string format(const std::string &message, std::size_t line,
                              const std::string &field) {
        std::string out = "parse error";
        if (line > 0)
            out += " at line " + std::to_string(line);
        if (!field.empty())
            out += " in field '" + field + "'";
        return out + ": " + message;
    }

    std::size_t line_;
    std::string field_;
};

} // namespace eemimo
