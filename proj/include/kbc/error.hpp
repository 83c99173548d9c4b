#pragma once

#include <stdexcept>
#include <string>

namespace kbc {

// Bad user-supplied data: malformed glossary, model or table files, unusable corpora.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file or directory could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

}  // namespace kbc
