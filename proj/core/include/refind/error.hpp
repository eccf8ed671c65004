#pragma once

#include <stdexcept>
#include <string>

namespace refind {

/// Broad classification used by the CLI and the HTTP layer to map failures
/// onto exit codes and status codes.
enum class ErrorKind {
    invalid_argument,  // malformed input value or record
    not_found,         // unknown id (session, question, document, attribute)
    conflict,          // operation not valid in the current state
    io,                // file could not be read or written
    schema,            // persisted document has the wrong shape
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) { return {ErrorKind::invalid_argument, what}; }
inline Error not_found(const std::string& what) { return {ErrorKind::not_found, what}; }
inline Error conflict(const std::string& what) { return {ErrorKind::conflict, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::io, what}; }
inline Error schema_error(const std::string& what) { return {ErrorKind::schema, what}; }

}  // namespace refind
