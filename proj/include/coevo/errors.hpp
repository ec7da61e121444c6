// Error types shared across the co-evolution engine.
//
// Hard failures are exceptions; diagnostics that are part of a result
// (metamodel violations, conformance violations, constraint violations)
// are returned as data by the respective modules.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coevo {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An error that carries a list of diagnostic lines (violations etc.).
class DetailedError : public Error {
public:
    DetailedError(const std::string& message, std::vector<std::string> details)
        : Error(message), details_(std::move(details)) {}
    const std::vector<std::string>& details() const { return details_; }

private:
    std::vector<std::string> details_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class UnknownClassError : public NotFoundError {
public:
    using NotFoundError::NotFoundError;
};

class UnknownObjectError : public NotFoundError {
public:
    using NotFoundError::NotFoundError;
};

class UnknownResourceError : public NotFoundError {
public:
    using NotFoundError::NotFoundError;
};

class UnknownOperationError : public NotFoundError {
public:
    using NotFoundError::NotFoundError;
};

class UnknownHookError : public NotFoundError {
public:
    using NotFoundError::NotFoundError;
};

class DuplicateHookError : public Error {
public:
    using Error::Error;
};

class BadArgumentsError : public Error {
public:
    using Error::Error;
};

// Metamodel failed validation where a valid one is required.
class InvalidMetamodelError : public DetailedError {
public:
    using DetailedError::DetailedError;
};

// Recording a change that cannot apply to the head metamodel.
class InapplicableChangeError : public DetailedError {
public:
    using DetailedError::DetailedError;
};

class ClosedReleaseError : public Error {
public:
    using Error::Error;
};

// attachMigration span problems (out of range, crossing non-primitives).
class SpanError : public Error {
public:
    using Error::Error;
};

class CorruptHistoryError : public Error {
public:
    using Error::Error;
};

// writeSlot refused a containment write that would create a cycle.
class ContainmentCycleError : public Error {
public:
    using Error::Error;
};

// Input model does not conform to the expected release's metamodel.
class NonconformingInputError : public DetailedError {
public:
    using DetailedError::DetailedError;
};

} // namespace coevo
