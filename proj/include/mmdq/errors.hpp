#pragma once

#include <stdexcept>
#include <string>

#include "mmdq/types.hpp"

namespace mmdq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user input: dimension mismatch, invalid parameter, bad file.
class InputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A kernel system could not be factored even after the full jitter schedule.
class SingularKernelMatrix : public Error {
public:
    SingularKernelMatrix(const std::string& what, Points configuration)
        : Error(what), configuration_(std::move(configuration)) {}

    const Points& configuration() const noexcept { return configuration_; }

private:
    Points configuration_;
};

/// An optimal weight underflowed, so the MSIP map cannot divide by it.
class DegenerateWeight : public Error {
public:
    DegenerateWeight(const std::string& what, Index particle) : Error(what), particle_(particle) {}

    Index particle() const noexcept { return particle_; }

private:
    Index particle_;
};

/// A NaN/Inf appeared in a particle state during time integration.
class NonFiniteState : public Error {
public:
    NonFiniteState(const std::string& what, long step) : Error(what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

/// The adaptive integrator needed a step below its floor.
class StepUnderflow : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace mmdq
