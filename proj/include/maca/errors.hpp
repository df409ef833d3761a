#pragma once

#include <stdexcept>
#include <string>

namespace maca {

// Input data rejected during parsing or validation (bad pool file, bad config value).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller broke an operation contract (dimension mismatch, stepping a finished episode).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Persisted artifact is unreadable or fails integrity checks (checkpoint, manifest).
struct CorruptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote agent call failed. Retryable covers transport faults and timeouts;
// non-retryable covers malformed responses.
struct RemoteError : std::runtime_error {
    RemoteError(const std::string& what, bool retryable_)
        : std::runtime_error(what), retryable(retryable_) {}
    bool retryable;
};

}  // namespace maca
