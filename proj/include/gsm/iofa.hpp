#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsm/symbols.hpp"

namespace gsm {

using StateId = std::uint32_t;
inline constexpr StateId kNoState = 0xffffffffu;

// One (source, input, output) edge. `count`/`target` describe the current
// model and change when merges fold edges together; `original_count` and
// `original_target` are frozen at PTA construction time. Edges created later
// by merge folding carry original_target == kNoState and original_count == 0,
// so the original tree can always be recovered by filtering on
// original_target.
struct TransitionInfo {
    StateId target = kNoState;
    StateId original_target = kNoState;
    std::uint64_t count = 0;
    std::uint64_t original_count = 0;
};

using OutMap = SymbolMap<TransitionInfo>;
using TransMap = SymbolMap<OutMap>;

// A state of the internal automaton. Nodes are created during PTA
// construction and never destroyed; merged-away nodes stay in the arena so
// their original counts remain readable.
struct TreeState {
    StateId id = 0;
    // Unique incoming PTA edge; pred_source == kNoState for the root.
    StateId pred_source = kNoState;
    Symbol pred_input{};
    Symbol pred_output{};
    std::uint32_t depth = 0;
    // Moore output of the state. Symbol::kNone means unknown (labeled-word
    // trees leave inner states unlabeled).
    Symbol state_output{};
    TransMap transitions;
};

enum class OutputBehavior { moore, mealy };
enum class TransitionBehavior { deterministic, nondeterministic, stochastic };

struct BehaviorConfig {
    OutputBehavior output_behavior = OutputBehavior::mealy;
    TransitionBehavior transition_behavior = TransitionBehavior::deterministic;
};

const char* to_string(OutputBehavior b);
const char* to_string(TransitionBehavior b);

// IO frequency automaton. Holds the state arena, the input/output symbol
// tables and a union-find layer that records which states have been merged.
// Reading a transition target must always go through find(): merging leaves
// stale targets in place instead of rewriting every edge.
class Iofa {
public:
    Iofa();

    StateId add_state(StateId pred_source, Symbol in, Symbol out);

    TreeState& state(StateId id) { return states_[id]; }
    const TreeState& state(StateId id) const { return states_[id]; }
    std::size_t arena_size() const { return states_.size(); }

    StateId find(StateId id) const;
    bool is_live(StateId id) const { return find(id) == id; }
    StateId initial() const { return find(0); }
    std::vector<StateId> live_states() const;
    std::size_t live_count() const;

    // Points `absorbed` at `survivor`. The caller is responsible for having
    // folded the absorbed state's behavior into the survivor first.
    void union_into(StateId absorbed, StateId survivor);

    // Incremented by every structural mutation; partitions remember the
    // version they were computed against.
    std::uint64_t version() const { return version_; }
    void bump_version() { ++version_; }

    SymbolTable& inputs() { return inputs_; }
    const SymbolTable& inputs() const { return inputs_; }
    SymbolTable& outputs() { return outputs_; }
    const SymbolTable& outputs() const { return outputs_; }

    // Initial output of a Moore-trace model (the virtual edge into the
    // root); Symbol::kNone when the model has none.
    Symbol initial_output() const { return initial_output_; }
    void set_initial_output(Symbol o) { initial_output_ = o; }

    // Set by the PTA builder after BFS renumbering: state ids coincide with
    // the shortlex order of prefixes, so node_order can compare ids.
    bool canonical_ids() const { return canonical_ids_; }
    void mark_canonical_ids() { canonical_ids_ = true; }

    // (input, output) pairs along the unique PTA path from the root.
    std::vector<std::pair<Symbol, Symbol>> prefix(StateId id) const;

private:
    std::vector<TreeState> states_;
    mutable std::vector<StateId> parent_;
    SymbolTable inputs_;
    SymbolTable outputs_;
    Symbol initial_output_{};
    std::uint64_t version_ = 0;
    bool canonical_ids_ = false;
};

struct Partition;
struct PartitionClass;

// Shortlex order on PTA prefixes: shorter first, equal lengths compared
// pointwise as (input, output) pairs under textual symbol order. PTA
// construction numbers states in BFS order with children visited in textual
// order, so on a freshly built PTA this coincides with id order.
std::strong_ordering node_order(const Iofa& m, StateId a, StateId b);

// Read-only handle over an output-frequency distribution, used by
// compatibility predicates. Wraps either a concrete state (live counts, or
// the frozen PTA counts when pta=true) or a folded partition class.
class NodeView {
public:
    NodeView(const Iofa& m, StateId s, bool pta = false);
    NodeView(const Iofa& m, const PartitionClass& cls);

    const Iofa& model() const { return *model_; }
    bool is_state() const { return state_ != kNoState; }
    StateId state_id() const { return state_; }
    bool pta_counts() const { return pta_; }

    std::uint64_t count(Symbol in, Symbol out) const;
    std::uint64_t total(Symbol in) const;
    bool has_input(Symbol in) const;

    // Visits (input) resp. (output, count) entries; PTA views skip edges
    // that were added by merges. F returns void.
    template <typename F>
    void each_input(F&& f) const {
        for (const auto& [in, outs] : *map_) {
            if (!pta_) {
                if (!outs.empty()) f(in);
                continue;
            }
            for (const auto& [out, rec] : outs) {
                (void)out;
                if (rec.original_target != kNoState) {
                    f(in);
                    break;
                }
            }
        }
    }
    template <typename F>
    void each_output(Symbol in, F&& f) const {
        const OutMap* outs = map_->find(in);
        if (!outs) return;
        for (const auto& [out, rec] : *outs) {
            if (pta_ && rec.original_target == kNoState) continue;
            f(out, effective_count(rec));
        }
    }

    // Successor under one (input, output) step: the PTA child when
    // pta=true, the live merge representative otherwise. Not available on
    // class views (callers descend through states only).
    StateId successor(Symbol in, Symbol out) const;

private:
    std::uint64_t effective_count(const TransitionInfo& rec) const {
        return pta_ ? rec.original_count : rec.count;
    }

    const Iofa* model_;
    const TransMap* map_;
    StateId state_ = kNoState;
    bool pta_ = false;
};

// Structural predicate per-input: at most one output anywhere in the model
// (viewed through `partition` when given).
bool is_deterministic(const Iofa& m, const Partition* partition = nullptr);

// Structural predicate per-state: all transitions into a state agree on
// their output symbol; the model's initial output counts as a virtual edge
// into the initial state.
bool is_moore(const Iofa& m, const Partition* partition = nullptr);

// Retires live states that are no longer reachable from the initial state.
// Their counts are discarded, not folded anywhere.
void prune_unreachable(Iofa& m);

struct OutcomeProb {
    Symbol output{};
    StateId target = kNoState;
    double prob = 0.0;
};

struct StateInputDist {
    StateId state = kNoState;
    Symbol input{};
    std::vector<OutcomeProb> outcomes;
};

// Relative output frequencies per (state, input) over the live model.
// Probabilities per group sum to 1.
std::vector<StateInputDist> normalize(const Iofa& m);

}  // namespace gsm
