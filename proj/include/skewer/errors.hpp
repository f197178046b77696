#pragma once

#include <stdexcept>
#include <string>

namespace skewer {

// Invalid user input: bad hyper-parameters, malformed config, dimension
// mismatches. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Runtime failure: unreadable files, numeric breakdown. CLI maps this to
// exit code 2.
class RuntimeFailure : public std::runtime_error {
public:
    explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public RuntimeFailure {
public:
    explicit IoError(const std::string& what) : RuntimeFailure(what) {}
};

// Checkpoint loading distinguishes these three failure kinds.
class BadMagicError : public IoError {
public:
    explicit BadMagicError(const std::string& what) : IoError(what) {}
};

class TruncatedCheckpointError : public IoError {
public:
    explicit TruncatedCheckpointError(const std::string& what) : IoError(what) {}
};

class VersionMismatchError : public IoError {
public:
    explicit VersionMismatchError(const std::string& what) : IoError(what) {}
};

}  // namespace skewer
