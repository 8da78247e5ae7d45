#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dps {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A vector or matrix had the wrong length.
class DimensionError : public Error {
public:
    DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
        : Error(what + ": expected length " + std::to_string(expected) + ", got " +
                std::to_string(actual)),
          expected_(expected),
          actual_(actual) {}

    std::size_t expected() const { return expected_; }
    std::size_t actual() const { return actual_; }

private:
    std::size_t expected_;
    std::size_t actual_;
};

/// Consecutive layers of a network do not chain, or the ends do not match the
/// normalizer / action bounds.
class DimensionChainError : public Error {
public:
    using Error::Error;
};

/// A parameter or statistic is NaN or infinite.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Invalid value outside the allowed domain (negative variance, low >= high, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Operation called in a state where it is not allowed (e.g. stepping a finished episode).
class UsageError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

class CheckpointNotFound : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

/// The file is not valid JSON or does not follow the checkpoint schema.
class CheckpointFormatError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

class CheckpointVersionError : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

/// Raised when an episode produces a non-finite observation or reward, or when a
/// paired evaluation fails; the message names the step or pair.
class RolloutError : public Error {
public:
    using Error::Error;
};

/// Ratio shaping was requested for a non-positive return.
class RewardSignError : public Error {
public:
    using Error::Error;
};

}  // namespace dps
