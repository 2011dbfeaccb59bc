#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gsm/iofa.hpp"
#include "gsm/partition.hpp"
#include "gsm/traces.hpp"

namespace gsm {

// Score of a merge candidate: a real number or one of the two sentinels.
// accept compares above every value and reject below; accept additionally
// short-circuits candidate evaluation (the candidate is merged immediately),
// reject counts towards a blue state being unmergeable.
struct Score {
    enum class Kind : std::uint8_t { reject = 0, value = 1, accept = 2 };
    Kind kind = Kind::value;
    double value = 0.0;

    static Score accept() { return {Kind::accept, 0.0}; }
    static Score reject() { return {Kind::reject, 0.0}; }
    static Score of(double v) { return {Kind::value, v}; }

    bool is_accept() const { return kind == Kind::accept; }
    bool is_reject() const { return kind == Kind::reject; }

    friend bool operator<(const Score& a, const Score& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.kind == Kind::value && a.value < b.value;
    }
};

// Pluggable strategy driving the engine. A null local_compatibility accepts
// every pair; a null score_function scores every surviving candidate as
// accept (greedy first-feasible merging); a null reset is a no-op.
//
// local_compatibility receives the partition-side node first and the node
// joining it second.
struct MergeStrategy {
    std::string name = "custom";
    std::function<bool(const NodeView&, const NodeView&)> local_compatibility;
    std::function<Score(const Iofa&, const Partition&)> score_function;
    std::function<void()> reset;
};

struct EngineConfig {
    BehaviorConfig behavior;
    MergeStrategy strategy;
    bool eval_compat_on_pta = false;
    bool eval_compat_on_futures = false;
    bool consider_only_min_blue = false;
    bool depth_first = false;
    // Candidate evaluation order; null means shortlex node_order.
    std::function<std::strong_ordering(const Iofa&, StateId, StateId)> order;
    std::function<void(Iofa&)> pta_processing;
    std::function<void(Iofa&)> postprocessing;
};

// Observation-only callbacks; the run result is identical with or without
// them. candidate_evaluated reports rejected candidates with a reject score.
struct Instrumentation {
    std::function<void(const Iofa&)> pta_built;
    std::function<void(StateId red, StateId blue, Score score)> candidate_evaluated;
    std::function<void(StateId state)> promoted;
    std::function<void(StateId red, StateId blue, const Partition& p)> merge_applied;
    std::function<void(const Iofa&)> finished;
};

// First constraint that failed a candidate, for diagnostics.
struct MergeRejection {
    std::string constraint;  // "moore" | "deterministic" | "local_compatibility" | "score"
    StateId a = kNoState;
    StateId b = kNoState;
};

struct RunStats {
    std::size_t pta_states = 0;
    std::size_t final_states = 0;
    std::size_t merges = 0;
    std::size_t promotions = 0;
};

// One-step successors of the red set that are not red, sorted by node order.
std::vector<StateId> compute_blue(const Iofa& m, const std::vector<StateId>& red,
                                  const EngineConfig& config);

struct MergeOutcome {
    Score score;
    Partition partition;
};

// Evaluates the candidate merge (red, blue): computes the transitive closure
// of implied merges, enforcing Moore/determinism constraints per the
// behavior config and the strategy's local compatibility, then scores the
// resulting partition. Never mutates the model. On failure returns nullopt
// and fills *why when given.
std::optional<MergeOutcome> try_merge(const Iofa& m, StateId red, StateId blue,
                                      const EngineConfig& config,
                                      MergeRejection* why = nullptr);

// Commits a partition produced by try_merge on this exact model version:
// members are unioned into their representatives and the representatives'
// transition maps take the folded counts. Stale targets elsewhere resolve
// through find().
void apply_merge(Iofa& m, const Partition& partition);

// Pairwise compatibility over the common futures of a and b: evaluates the
// strategy's local_compatibility on (a, b) and on every pair of successors
// reached by shared (input, output) steps, depth-first when configured,
// else breadth-first. With eval_compat_on_pta the traversal uses the
// original PTA structure and counts.
bool check_futures(const Iofa& m, StateId a, StateId b, const EngineConfig& config);

// The red-blue loop: promote the minimal blue state that no red state can
// merge with, otherwise apply the best-scoring candidate (ties: minimal
// blue, then minimal red; an accept score is merged immediately).
Iofa run_engine(const TraceSet& data, const EngineConfig& config,
                Instrumentation* instr = nullptr, RunStats* stats = nullptr);

// Same loop on an already-built model (the PTA is consumed).
Iofa run_engine_on(Iofa model, const EngineConfig& config, Instrumentation* instr = nullptr,
                   RunStats* stats = nullptr);

}  // namespace gsm
