#pragma once

#include <stdexcept>
#include <string>

namespace pathhjb {

// Invalid arguments, misaligned grids, bad configs. CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Node caps, enumeration budgets. CLI exit code 2.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// A state path left the divergence guard. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long path_index, long step_index)
        : std::runtime_error(what), path(path_index), step(step_index) {}
    long path;
    long step;
};

// A coefficient or field returned a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

// A field is missing a derivative required by the operation.
class UnsupportedFieldError : public std::invalid_argument {
public:
    explicit UnsupportedFieldError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace pathhjb
