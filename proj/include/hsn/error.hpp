#pragma once

#include <stdexcept>
#include <string>

namespace hsn {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a shape, range or precondition contract.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A feature container, manifest or checkpoint could not be decoded.
class CorruptFile : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given input (e.g. AUC with a single class).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw InvalidInput(message);
    }
}

}  // namespace detail
}  // namespace hsn
