#include "gsm/iofa.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "gsm/errors.hpp"
#include "gsm/partition.hpp"

namespace gsm {

const char* to_string(OutputBehavior b) {
    return b == OutputBehavior::moore ? "moore" : "mealy";
}

const char* to_string(TransitionBehavior b) {
    switch (b) {
        case TransitionBehavior::deterministic: return "deterministic";
        case TransitionBehavior::nondeterministic: return "nondeterministic";
        default: return "stochastic";
    }
}

Iofa::Iofa() {
    states_.push_back(TreeState{});
    parent_.push_back(0);
}

StateId Iofa::add_state(StateId pred_source, Symbol in, Symbol out) {
    auto id = static_cast<StateId>(states_.size());
    TreeState s;
    s.id = id;
    s.pred_source = pred_source;
    s.pred_input = in;
    s.pred_output = out;
    s.depth = states_[pred_source].depth + 1;
    s.state_output = out;
    states_.push_back(std::move(s));
    parent_.push_back(id);
    return id;
}

StateId Iofa::find(StateId id) const {
    StateId root = id;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[id] != root) {
        StateId next = parent_[id];
        parent_[id] = root;
        id = next;
    }
    return root;
}

std::vector<StateId> Iofa::live_states() const {
    std::vector<StateId> out;
    for (StateId id = 0; id < states_.size(); ++id)
        if (find(id) == id) out.push_back(id);
    return out;
}

std::size_t Iofa::live_count() const {
    std::size_t n = 0;
    for (StateId id = 0; id < states_.size(); ++id)
        if (find(id) == id) ++n;
    return n;
}

void Iofa::union_into(StateId absorbed, StateId survivor) {
    parent_[find(absorbed)] = find(survivor);
}

std::vector<std::pair<Symbol, Symbol>> Iofa::prefix(StateId id) const {
    std::vector<std::pair<Symbol, Symbol>> path;
    path.reserve(states_[id].depth);
    for (StateId at = id; states_[at].pred_source != kNoState; at = states_[at].pred_source)
        path.emplace_back(states_[at].pred_input, states_[at].pred_output);
    std::reverse(path.begin(), path.end());
    return path;
}

std::strong_ordering node_order(const Iofa& m, StateId a, StateId b) {
    if (a == b) return std::strong_ordering::equal;
    const auto& sa = m.state(a);
    const auto& sb = m.state(b);
    if (sa.depth != sb.depth) return sa.depth <=> sb.depth;
    if (m.canonical_ids()) return a <=> b;

    auto pa = m.prefix(a);
    auto pb = m.prefix(b);
    for (std::size_t k = 0; k < pa.size(); ++k) {
        if (pa[k].first != pb[k].first)
            return m.inputs().text(pa[k].first) <=> m.inputs().text(pb[k].first);
        if (pa[k].second != pb[k].second)
            return m.outputs().text(pa[k].second) <=> m.outputs().text(pb[k].second);
    }
    return a <=> b;
}

NodeView::NodeView(const Iofa& m, StateId s, bool pta)
    : model_(&m), map_(&m.state(s).transitions), state_(s), pta_(pta) {}

NodeView::NodeView(const Iofa& m, const PartitionClass& cls)
    : model_(&m), map_(&cls.transitions) {}

std::uint64_t NodeView::count(Symbol in, Symbol out) const {
    const OutMap* outs = map_->find(in);
    if (!outs) return 0;
    const TransitionInfo* rec = outs->find(out);
    if (!rec) return 0;
    if (pta_ && rec->original_target == kNoState) return 0;
    return effective_count(*rec);
}

std::uint64_t NodeView::total(Symbol in) const {
    std::uint64_t sum = 0;
    each_output(in, [&](Symbol, std::uint64_t c) { sum += c; });
    return sum;
}

bool NodeView::has_input(Symbol in) const {
    const OutMap* outs = map_->find(in);
    if (!outs || outs->empty()) return false;
    if (!pta_) return true;
    for (const auto& [out, rec] : *outs) {
        (void)out;
        if (rec.original_target != kNoState) return true;
    }
    return false;
}

StateId NodeView::successor(Symbol in, Symbol out) const {
    const OutMap* outs = map_->find(in);
    if (!outs) return kNoState;
    const TransitionInfo* rec = outs->find(out);
    if (!rec) return kNoState;
    if (pta_) return rec->original_target;
    return rec->target == kNoState ? kNoState : model_->find(rec->target);
}

namespace {

// Iterates the live model, with partition classes substituted for their
// members when a partition is given. Visits f(source_map, resolve) where
// resolve maps a raw transition target to its view representative.
template <typename F>
bool each_view_source(const Iofa& m, const Partition* p, F&& f) {
    auto resolve = [&](StateId t) {
        StateId live = m.find(t);
        return p ? p->representative_of(live) : live;
    };
    if (p) {
        for (const auto& cls : p->classes)
            if (!f(cls.transitions, resolve)) return false;
    }
    for (StateId id = 0; id < m.arena_size(); ++id) {
        if (!m.is_live(id)) continue;
        if (p && p->class_of.count(id)) continue;
        if (!f(m.state(id).transitions, resolve)) return false;
    }
    return true;
}

}  // namespace

bool is_deterministic(const Iofa& m, const Partition* partition) {
    return each_view_source(m, partition, [](const TransMap& map, auto&&) {
        for (const auto& [in, outs] : map) {
            (void)in;
            if (outs.size() > 1) return false;
        }
        return true;
    });
}

bool is_moore(const Iofa& m, const Partition* partition) {
    std::unordered_map<StateId, Symbol> incoming;
    auto join = [&](StateId target, Symbol out) {
        auto [it, fresh] = incoming.emplace(target, out);
        return fresh || it->second == out;
    };
    if (m.initial_output().valid()) {
        StateId init = partition ? partition->representative_of(m.initial()) : m.initial();
        join(init, m.initial_output());
    }
    return each_view_source(m, partition, [&](const TransMap& map, auto&& resolve) {
        for (const auto& [in, outs] : map) {
            (void)in;
            for (const auto& [out, rec] : outs)
                if (!join(resolve(rec.target), out)) return false;
        }
        return true;
    });
}

void prune_unreachable(Iofa& m) {
    std::unordered_set<StateId> seen{m.initial()};
    std::vector<StateId> queue{m.initial()};
    for (std::size_t k = 0; k < queue.size(); ++k) {
        for (const auto& [in, outs] : m.state(queue[k]).transitions) {
            (void)in;
            for (const auto& [out, rec] : outs) {
                (void)out;
                StateId t = m.find(rec.target);
                if (seen.insert(t).second) queue.push_back(t);
            }
        }
    }
    bool changed = false;
    for (StateId id : m.live_states()) {
        if (!seen.count(id)) {
            m.union_into(id, m.initial());
            changed = true;
        }
    }
    if (changed) m.bump_version();
}

std::vector<StateInputDist> normalize(const Iofa& m) {
    std::vector<StateInputDist> result;
    for (StateId id : m.live_states()) {
        for (const auto& [in, outs] : m.state(id).transitions) {
            if (outs.empty()) continue;
            std::uint64_t total = 0;
            for (const auto& [out, rec] : outs) {
                (void)out;
                total += rec.count;
            }
            if (total == 0)
                throw StructureViolation("state-input group with zero total count",
                                         "positive_counts", id);
            StateInputDist dist;
            dist.state = id;
            dist.input = in;
            for (const auto& [out, rec] : outs)
                dist.outcomes.push_back(
                    {out, m.find(rec.target), static_cast<double>(rec.count) / static_cast<double>(total)});
            result.push_back(std::move(dist));
        }
    }
    return result;
}

}  // namespace gsm
