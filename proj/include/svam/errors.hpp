#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svam {

// Input could not be decoded. location() is a byte offset for binary
// formats (PGM) and a 1-based line number for CSV.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t location)
        : std::runtime_error(what), location_(location) {}

    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

// An operation arrived in the wrong trial phase (e.g. a response during Rest).
class PhaseViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Unknown session, or an operation invalid for the session's lifecycle state.
class SessionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Session clock went backwards.
class SessionFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace svam
