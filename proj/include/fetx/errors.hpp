#pragma once

#include <stdexcept>
#include <string>

namespace fetx {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model parameter or bias was non-finite or outside its domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// A curve feature could not be computed. `feature()` names the failing feature.
class ExtractionError : public Error {
public:
    ExtractionError(std::string feature, const std::string& what)
        : Error(feature + ": " + what), feature_(std::move(feature)) {}

    const std::string& feature() const noexcept { return feature_; }

private:
    std::string feature_;
};

/// Inconsistent ranges, bad config keys, degenerate normalizer statistics.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (files, grids, shapes).
class DataError : public Error {
public:
    using Error::Error;
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace fetx
