#pragma once

#include <stdexcept>
#include <string>

namespace dialektor {

/// Input data (capture files, KB files, verdict files) failed to parse.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed data violates a documented invariant (duplicate ids, empty bytes, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Knowledge-base level failure: corruption, unreadable file, bad entry.
struct KbError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Insertion clashed with an entry already present for the same (hash, mode).
struct KbConflictError : KbError {
    KbConflictError(const std::string& msg, std::string existing)
        : KbError(msg), existing_source(std::move(existing)) {}
    std::string existing_source;
};

/// A generation spec cannot be realized (e.g. repeat state with one transaction).
struct GenSpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dialektor
