#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace ministl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or mutually incompatible configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Array/batch shape violates an interface contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Name not present in a registry or map.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Attempt to register a name twice.
class RegistrationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Sprite/canvas geometry that cannot be placed.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Operation requires generation provenance the input does not carry.
class ProvenanceError : public Error {
public:
    using Error::Error;
};

/// Cost estimation hit a layer kind it has no model for.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Non-finite values where finite ones are required (e.g. training loss).
class NumericsError : public Error {
public:
    using Error::Error;
};

}  // namespace ministl

// Throws ErrType with a streamed message when cond is false.
#define MINISTL_CHECK(cond, ErrType, msg)            \
    do {                                             \
        if (!(cond)) {                               \
            std::ostringstream mstl_check_os;        \
            mstl_check_os << msg;                    \
            throw ErrType(mstl_check_os.str());      \
        }                                            \
    } while (0)
