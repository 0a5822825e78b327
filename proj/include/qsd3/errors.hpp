#pragma once

#include <stdexcept>
#include <string>

namespace qsd3 {

// Base for all toolkit errors. The CLI maps each subclass to a stable
// machine-readable error class string and a nonzero exit code.
class Error : public std::runtime_error {
public:
    Error(std::string cls, const std::string& msg)
        : std::runtime_error(msg), class_(std::move(cls)) {}
    const std::string& error_class() const noexcept { return class_; }

private:
    std::string class_;
};

class InvalidDimensionError : public Error {
public:
    explicit InvalidDimensionError(const std::string& msg)
        : Error("invalid-dimension", msg) {}
};

// Raised when a displaced vacuum does not fit the truncated basis.
// Carries the smallest n_max that would satisfy the adequacy heuristic.
class TruncationTooSmallError : public Error {
public:
    TruncationTooSmallError(const std::string& msg, int required)
        : Error("truncation-too-small", msg), required_n_max_(required) {}
    int required_n_max() const noexcept { return required_n_max_; }

private:
    int required_n_max_;
};

class NumericalBlowupError : public Error {
public:
    NumericalBlowupError(const std::string& msg, double t, long step)
        : Error("numerical-blowup", msg), time_(t), step_(step) {}
    double time() const noexcept { return time_; }
    long step() const noexcept { return step_; }

private:
    double time_;
    long step_;
};

class StepSizeError : public Error {
public:
    explicit StepSizeError(const std::string& msg) : Error("step-size", msg) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg)
        : Error("validation", msg) {}
};

class CapExceededError : public Error {
public:
    explicit CapExceededError(const std::string& msg)
        : Error("cap-exceeded", msg) {}
};

} // namespace qsd3
