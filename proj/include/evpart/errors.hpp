// Error types shared across the library.
#pragma once

#include <stdexcept>

namespace evpart {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Values built over different frames were mixed in one operation.
struct frame_mismatch_error : error {
    using error::error;
};

// An input violates a documented invariant (mass sums, caps, partition shape, ...).
struct validation_error : error {
    using error::error;
};

// Precombination of totally contradictory event-specific evidences.
struct impossible_evidence_error : error {
    using error::error;
};

// A requested subset count cannot be realized.
struct infeasible_error : error {
    using error::error;
};

// An exhaustive computation would exceed the documented size caps.
struct oracle_too_large_error : error {
    using error::error;
};

// A corpus file could not be parsed; the message carries line diagnostics.
struct corpus_error : error {
    using error::error;
};

} // namespace evpart
