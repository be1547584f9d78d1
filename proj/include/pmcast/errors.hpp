#pragma once

#include <stdexcept>
#include <string>

namespace pmcast {

// Error hierarchy mapped onto CLI exit codes:
//   1 usage/config, 2 data/IO, 3 numeric.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 1; }
};

class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class EmptyDatasetError : public DataError {
public:
    using DataError::DataError;
};

class SizeError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class FetchError : public IoError {
public:
    using IoError::IoError;
};

class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

// Non-finite loss during training; remembers where it happened.
class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& msg, int epoch)
        : NumericError(msg), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

} // namespace pmcast
