#pragma once

#include <stdexcept>
#include <string>

namespace seedgen {

// Malformed external input (trace files, dictionaries, checkpoints).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument to an operation (out-of-range id, invalid parameter).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Pipeline configuration problems (missing directories, bad values).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace seedgen
