#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scclg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NegativeCountError : public Error {
public:
    using Error::Error;
};

class DuplicateIdError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// An argument outside its documented domain (k, n_genes, alpha, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

class AllZeroCellError : public Error {
public:
    explicit AllZeroCellError(const std::string& cell_id)
        : Error("cell '" + cell_id + "' has no nonzero counts"), cell_id_(cell_id) {}
    const std::string& cell_id() const { return cell_id_; }

private:
    std::string cell_id_;
};

/// A loss or network output became NaN/inf.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// An operation was invoked in the wrong lifecycle phase.
class StateError : public Error {
public:
    using Error::Error;
};

}  // namespace scclg
