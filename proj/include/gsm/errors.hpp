#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsm {

// Base class for everything this library throws on bad data or bad usage.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input text matches none of the supported trace grammars.
struct UnparseableInput : Error {
    explicit UnparseableInput(const std::string& msg) : Error(msg) {}
};

// Input text matches more than one trace grammar.
struct AmbiguousFormat : Error {
    explicit AmbiguousFormat(const std::string& msg) : Error(msg) {}
};

// Moore trace sets must agree on the output emitted before the first input.
struct InconsistentInitialOutput : Error {
    explicit InconsistentInitialOutput(const std::string& msg) : Error(msg) {}
};

// Deterministic learning was requested but two traces disagree on the output
// after a common prefix. Carries the offending prefix rendered as text.
struct NondeterminismInData : Error {
    NondeterminismInData(const std::string& msg, std::string prefix)
        : Error(msg), offending_prefix(std::move(prefix)) {}
    std::string offending_prefix;
};

// One labeled word was given two different labels.
struct ConflictingLabels : Error {
    explicit ConflictingLabels(const std::string& msg) : Error(msg) {}
};

// A flag combination the engine refuses to guess semantics for.
struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& msg) : Error(msg) {}
};

// apply_merge was handed a partition computed against an older model state.
struct StalePartition : Error {
    explicit StalePartition(const std::string& msg) : Error(msg) {}
};

// The internal model violates a structural predicate required for the
// requested automaton family. Carries the predicate name and a witness state.
struct StructureViolation : Error {
    StructureViolation(const std::string& msg, std::string predicate_name, std::size_t witness_state)
        : Error(msg), predicate(std::move(predicate_name)), witness(witness_state) {}
    std::string predicate;
    std::size_t witness;
};

// A model document does not satisfy the JSON schema. Carries the path to the
// offending field.
struct SchemaError : Error {
    SchemaError(const std::string& msg, std::string field_path)
        : Error(msg + " (at " + field_path + ")"), path(std::move(field_path)) {}
    std::string path;
};

}  // namespace gsm
