#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lasdi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter point outside the declared parameter domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Incompatible matrix or vector dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

class DuplicateError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// File contents do not match the expected layout (magic, version, header sizes).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Non-finite value in input data. Carries the offending row and column.
class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& what, std::size_t row, std::size_t col)
        : Error(what), row_(row), col_(col) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

/// Requested dimension exceeds the numerical rank of the data.
class RankError : public Error {
public:
    using Error::Error;
};

/// An iterative method failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Newton iteration of an implicit time step did not converge.
class SolverDivergenceError : public Error {
public:
    SolverDivergenceError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// A full-order solve produced NaN or Inf.
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Autoencoder training diverged.
class TrainingError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Adaptive integration step fell below the minimum step size.
class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, double t_reached)
        : Error(what), t_reached_(t_reached) {}
    double t_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

/// Latent integration produced a non-finite state.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double t_reached)
        : Error(what), t_reached_(t_reached) {}
    double t_reached() const noexcept { return t_reached_; }

private:
    double t_reached_;
};

/// Query point lies outside the region an interpolant is defined on.
class ExtrapolationError : public Error {
public:
    using Error::Error;
};

/// Training parameters lack the layout an interpolator requires.
class GridError : public Error {
public:
    using Error::Error;
};

/// Singular linear system (e.g. RBF collocation matrix).
class SingularError : public Error {
public:
    using Error::Error;
};

/// Reference state has zero norm where a relative error is requested.
class DivisionError : public Error {
public:
    DivisionError(const std::string& what, std::size_t step)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace lasdi
