#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gsm/iofa.hpp"

namespace gsm {

// One equivalence class of a candidate merge: its members (live states at
// evaluation time), the behavior of the folded class (transitions with
// summed counts, targets resolved to live states) and the unified Moore
// output.
struct PartitionClass {
    StateId representative = kNoState;   // minimal member by node order
    std::vector<StateId> members;        // ascending ids
    TransMap transitions;
    Symbol state_output{};               // Symbol::kNone when unknown
};

// Result of a candidate merge plus all implied merges. States not mentioned
// in class_of are untouched by the merge. The partition is only valid
// against the model version it was computed from.
struct Partition {
    std::vector<PartitionClass> classes;
    std::unordered_map<StateId, std::uint32_t> class_of;
    std::uint64_t model_version = 0;

    // Live target -> its representative under this partition (identity for
    // untouched states).
    StateId representative_of(StateId live_state) const {
        auto it = class_of.find(live_state);
        return it == class_of.end() ? live_state
                                    : classes[it->second].representative;
    }

    // Number of pre-merge states involved, i.e. the size of the assignment.
    std::size_t merged_state_count() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.members.size();
        return n;
    }
};

}  // namespace gsm
