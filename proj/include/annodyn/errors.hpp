#pragma once

#include <stdexcept>
#include <string>

namespace annodyn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (bad JSON line, bad snapshot header, bad field type).
/// Messages carry the offending line number where one exists.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Cross-record violations: dangling references, duplicate ids, out-of-order
/// edit timestamps. Messages name the offending ids.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Precondition violations on otherwise valid data: zero-variance correlation,
/// empty lyrics at coverage time, no usable tokens, too few events for a
/// histogram, invalid simulation parameters.
class DomainError : public Error {
public:
    using Error::Error;
};

} // namespace annodyn
