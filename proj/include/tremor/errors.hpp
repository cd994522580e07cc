#pragma once

#include <stdexcept>
#include <string>

namespace tremor {

// Invalid knobs, unknown hyperparameter keys, malformed config files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or degenerate input data (bad CSV, empty class, missing cells).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A model could not be fitted (single-class input, solver non-convergence).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tremor
