#pragma once

#include <stdexcept>
#include <string>

namespace bpb {

// A stated hypothesis of an operation does not hold for the given input.
// The message names the failed inequality.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// An inequality that the construction guarantees failed during a strict run.
// This means a bug or an invalid modulus, never a bad input.
class LedgerError : public std::logic_error {
public:
    explicit LedgerError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace bpb
