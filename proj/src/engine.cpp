#include "gsm/engine.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "gsm/errors.hpp"
#include "gsm/ingest.hpp"

namespace gsm {

namespace {

std::strong_ordering order_of(const EngineConfig& cfg, const Iofa& m, StateId a, StateId b) {
    return cfg.order ? cfg.order(m, a, b) : node_order(m, a, b);
}

void validate(const EngineConfig& cfg) {
    if (cfg.eval_compat_on_pta && !cfg.eval_compat_on_futures)
        throw InvalidConfig("eval_compat_on_pta requires eval_compat_on_futures");
}

// Transitive closure of implied merges over a scratch union-find. The model
// is never touched; classes fold copies of the live transition maps.
class Closure {
public:
    Closure(const Iofa& m, const EngineConfig& cfg) : m_(m), cfg_(cfg) {}

    bool run(StateId red, StateId blue) {
        pending_.emplace_back(red, blue);
        bool moore = cfg_.behavior.output_behavior == OutputBehavior::moore;
        bool det = cfg_.behavior.transition_behavior == TransitionBehavior::deterministic;
        bool use_compat = !cfg_.eval_compat_on_futures &&
                          static_cast<bool>(cfg_.strategy.local_compatibility);

        while (!pending_.empty()) {
            auto [a, b] = pending_.front();
            pending_.pop_front();
            StateId ra = find(a), rb = find(b);
            if (ra == rb) continue;

            std::uint32_t ia = materialize(ra), ib = materialize(rb);
            if (use_compat &&
                !cfg_.strategy.local_compatibility(NodeView(m_, classes_[ia]),
                                                   NodeView(m_, classes_[ib]))) {
                rejection = {"local_compatibility", a, b};
                return false;
            }

            PartitionClass& A = classes_[ia];
            PartitionClass& B = classes_[ib];
            if (moore && A.state_output.valid() && B.state_output.valid() &&
                A.state_output != B.state_output) {
                rejection = {"moore", a, b};
                return false;
            }

            // Fold the smaller class into the larger one.
            bool swap = B.members.size() > A.members.size();
            PartitionClass& into = swap ? B : A;
            PartitionClass& from = swap ? A : B;
            for (const auto& [in, outs] : from.transitions) {
                OutMap& slot = into.transitions.obtain(in);
                for (const auto& [out, rec] : outs) {
                    if (TransitionInfo* cur = slot.find(out)) {
                        pending_.emplace_back(cur->target, rec.target);
                        cur->count += rec.count;
                    } else {
                        slot.obtain(out) = rec;
                    }
                }
                if (det && slot.size() > 1) {
                    rejection = {"deterministic", a, b};
                    return false;
                }
            }
            into.members.insert(into.members.end(), from.members.begin(), from.members.end());
            if (!into.state_output.valid()) into.state_output = from.state_output;
            if (node_order_min(from.representative, into.representative) == from.representative)
                into.representative = from.representative;

            StateId winner = swap ? rb : ra;
            StateId loser = swap ? ra : rb;
            parent_[loser] = winner;
            class_of_root_[winner] = swap ? ib : ia;
            class_of_root_.erase(loser);
            from = PartitionClass{};  // release folded storage
        }
        return true;
    }

    Partition take_partition() {
        Partition p;
        for (auto& [root, idx] : class_of_root_) {
            (void)root;
            PartitionClass& cls = classes_[idx];
            std::sort(cls.members.begin(), cls.members.end());
            p.classes.push_back(std::move(cls));
        }
        std::sort(p.classes.begin(), p.classes.end(),
                  [](const PartitionClass& a, const PartitionClass& b) {
                      return a.representative < b.representative;
                  });
        for (std::uint32_t k = 0; k < p.classes.size(); ++k)
            for (StateId s : p.classes[k].members) p.class_of.emplace(s, k);
        p.model_version = m_.version();
        return p;
    }

    MergeRejection rejection;

private:
    StateId find(StateId s) {
        auto it = parent_.find(s);
        if (it == parent_.end()) return s;
        StateId root = find(it->second);
        parent_[s] = root;
        return root;
    }

    StateId node_order_min(StateId a, StateId b) {
        return order_of(cfg_, m_, a, b) < 0 ? a : b;
    }

    // Ensures a class exists for live root `r`; returns its index.
    std::uint32_t materialize(StateId r) {
        auto it = class_of_root_.find(r);
        if (it != class_of_root_.end()) return it->second;
        PartitionClass cls;
        cls.representative = r;
        cls.members.push_back(r);
        cls.state_output = m_.state(r).state_output;
        for (const auto& [in, outs] : m_.state(r).transitions) {
            OutMap& slot = cls.transitions.obtain(in);
            for (const auto& [out, rec] : outs) {
                TransitionInfo copy = rec;
                copy.target = m_.find(rec.target);
                slot.obtain(out) = copy;
            }
        }
        auto idx = static_cast<std::uint32_t>(classes_.size());
        classes_.push_back(std::move(cls));
        class_of_root_.emplace(r, idx);
        return idx;
    }

    const Iofa& m_;
    const EngineConfig& cfg_;
    std::deque<std::pair<StateId, StateId>> pending_;
    std::unordered_map<StateId, StateId> parent_;
    std::unordered_map<StateId, std::uint32_t> class_of_root_;
    std::vector<PartitionClass> classes_;
};

}  // namespace

std::vector<StateId> compute_blue(const Iofa& m, const std::vector<StateId>& red,
                                  const EngineConfig& config) {
    std::unordered_set<StateId> redset(red.begin(), red.end());
    std::unordered_set<StateId> seen;
    std::vector<StateId> blue;
    for (StateId r : red) {
        for (const auto& [in, outs] : m.state(r).transitions) {
            (void)in;
            for (const auto& [out, rec] : outs) {
                (void)out;
                StateId t = m.find(rec.target);
                if (!redset.count(t) && seen.insert(t).second) blue.push_back(t);
            }
        }
    }
    std::sort(blue.begin(), blue.end(), [&](StateId a, StateId b) {
        return order_of(config, m, a, b) < 0;
    });
    return blue;
}

bool check_futures(const Iofa& m, StateId a, StateId b, const EngineConfig& config) {
    const auto& compat = config.strategy.local_compatibility;
    if (!compat) return true;
    bool pta = config.eval_compat_on_pta;

    std::deque<std::pair<StateId, StateId>> pairs{{a, b}};
    std::unordered_set<std::uint64_t> visited;
    auto key = [](StateId x, StateId y) {
        return (static_cast<std::uint64_t>(x) << 32) | y;
    };
    visited.insert(key(a, b));

    while (!pairs.empty()) {
        auto [x, y] = config.depth_first ? pairs.back() : pairs.front();
        if (config.depth_first) pairs.pop_back(); else pairs.pop_front();

        NodeView vx(m, x, pta), vy(m, y, pta);
        if (!compat(vx, vy)) return false;

        vx.each_input([&](Symbol in) {
            if (!vy.has_input(in)) return;
            vx.each_output(in, [&](Symbol out, std::uint64_t) {
                StateId sy = vy.successor(in, out);
                if (sy == kNoState) return;
                StateId sx = vx.successor(in, out);
                if (sx == kNoState || sx == sy) return;
                if (visited.insert(key(sx, sy)).second) pairs.emplace_back(sx, sy);
            });
        });
    }
    return true;
}

std::optional<MergeOutcome> try_merge(const Iofa& m, StateId red, StateId blue,
                                      const EngineConfig& config, MergeRejection* why) {
    validate(config);
    if (config.strategy.reset) config.strategy.reset();

    if (config.eval_compat_on_futures && !check_futures(m, red, blue, config)) {
        if (why) *why = {"local_compatibility", red, blue};
        return std::nullopt;
    }

    Closure closure(m, config);
    if (!closure.run(red, blue)) {
        if (why) *why = closure.rejection;
        return std::nullopt;
    }
    Partition p = closure.take_partition();

    Score score = Score::accept();
    if (config.strategy.score_function) {
        score = config.strategy.score_function(m, p);
        if (score.is_reject()) {
            if (why) *why = {"score", red, blue};
            return std::nullopt;
        }
    }
    return MergeOutcome{score, std::move(p)};
}

void apply_merge(Iofa& m, const Partition& partition) {
    if (partition.model_version != m.version())
        throw StalePartition("partition was computed against model version " +
                             std::to_string(partition.model_version) + " but the model is at " +
                             std::to_string(m.version()));

    for (const auto& cls : partition.classes)
        for (StateId member : cls.members)
            if (member != cls.representative) m.union_into(member, cls.representative);

    for (const auto& cls : partition.classes) {
        StateId rep = cls.representative;
        TransMap merged = std::move(m.state(rep).transitions);
        for (StateId member : cls.members) {
            if (member == rep) continue;
            for (const auto& [in, outs] : m.state(member).transitions) {
                OutMap& slot = merged.obtain(in);
                for (const auto& [out, rec] : outs) {
                    if (TransitionInfo* cur = slot.find(out))
                        cur->count += rec.count;
                    else
                        slot.obtain(out) = TransitionInfo{rec.target, kNoState, rec.count, 0};
                }
            }
        }
        m.state(rep).transitions = std::move(merged);
        if (cls.state_output.valid()) m.state(rep).state_output = cls.state_output;
    }
    m.bump_version();
}

Iofa run_engine_on(Iofa model, const EngineConfig& config, Instrumentation* instr,
                   RunStats* stats) {
    validate(config);
    Iofa m = std::move(model);

    if (config.pta_processing) {
        config.pta_processing(m);
        m.bump_version();
    }
    if (instr && instr->pta_built) instr->pta_built(m);
    if (stats) stats->pta_states = m.live_count();

    auto less = [&](StateId a, StateId b) { return order_of(config, m, a, b) < 0; };
    std::vector<StateId> red{m.initial()};

    for (;;) {
        auto blues = compute_blue(m, red, config);
        if (blues.empty()) break;
        if (config.consider_only_min_blue && blues.size() > 1) blues.resize(1);

        bool promoted = false;
        std::optional<MergeOutcome> best;
        StateId best_r = kNoState, best_b = kNoState;

        for (StateId b : blues) {
            bool mergeable = false;
            bool accepted = false;
            for (StateId r : red) {
                auto outcome = try_merge(m, r, b, config);
                if (instr && instr->candidate_evaluated)
                    instr->candidate_evaluated(r, b, outcome ? outcome->score : Score::reject());
                if (!outcome) continue;
                mergeable = true;
                if (outcome->score.is_accept()) {
                    best = std::move(outcome);
                    best_r = r;
                    best_b = b;
                    accepted = true;
                    break;
                }
                if (!best || best->score < outcome->score) {
                    best = std::move(outcome);
                    best_r = r;
                    best_b = b;
                }
            }
            if (accepted) break;
            if (!mergeable) {
                red.insert(std::upper_bound(red.begin(), red.end(), b, less), b);
                if (instr && instr->promoted) instr->promoted(b);
                if (stats) ++stats->promotions;
                promoted = true;
                break;
            }
        }
        if (promoted) continue;

        apply_merge(m, best->partition);
        if (instr && instr->merge_applied) instr->merge_applied(best_r, best_b, best->partition);
        if (stats) ++stats->merges;

        std::vector<StateId> survivors;
        for (StateId r : red) {
            StateId t = m.find(r);
            if (std::find(survivors.begin(), survivors.end(), t) == survivors.end())
                survivors.push_back(t);
        }
        std::sort(survivors.begin(), survivors.end(), less);
        red = std::move(survivors);
    }

    if (config.postprocessing) {
        config.postprocessing(m);
        m.bump_version();
    }
    if (instr && instr->finished) instr->finished(m);
    if (stats) stats->final_states = m.live_count();
    return m;
}

Iofa run_engine(const TraceSet& data, const EngineConfig& config, Instrumentation* instr,
                RunStats* stats) {
    return run_engine_on(build_pta(data, config.behavior), config, instr, stats);
}

}  // namespace gsm
