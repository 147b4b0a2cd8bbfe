#pragma once

#include <stdexcept>
#include <string>

namespace cmsar {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs outside the domain of a geometric formula (s <= 0, midpoint, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Grid or acquisition descriptors that do not agree with each other.
class GeometryMismatch : public Error {
public:
    using Error::Error;
};

// Bad magic string or unparseable header in a CMSAR1 file.
class FormatError : public Error {
public:
    using Error::Error;
};

// Payload shorter or longer than the header declares.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Recognized container family but unsupported revision.
class VersionError : public Error {
public:
    using Error::Error;
};

// Invalid scene specification; carries the index of the offending entry.
class SceneError : public Error {
public:
    SceneError(const std::string& what, std::size_t index)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cmsar
