#include "gsm/generate.hpp"

#include <limits>
#include <map>
#include <random>
#include <set>

#include "gsm/errors.hpp"

namespace gsm {

namespace {

// std::mt19937_64 output is portable; the distributions on top of it are
// not, so both draws are hand-rolled.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t below(std::uint64_t n) {
        std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

struct ModelIndex {
    // Per state, per input (sorted): outgoing transitions in model order.
    std::vector<std::map<std::string, std::vector<const ModelTransition*>>> by_state;
    std::vector<std::vector<const std::string*>> inputs_of;  // sorted keys per state
    std::vector<std::string> output_alphabet;                // sorted, distinct

    explicit ModelIndex(const LearnedModel& model) : by_state(model.states.size()) {
        std::set<std::string> outs;
        for (const ModelTransition& t : model.transitions) {
            by_state[t.source][t.input].push_back(&t);
            outs.insert(t.output);
        }
        for (const ModelState& st : model.states)
            if (!st.output.empty()) outs.insert(st.output);
        output_alphabet.assign(outs.begin(), outs.end());
        inputs_of.resize(model.states.size());
        for (std::size_t s = 0; s < by_state.size(); ++s)
            for (const auto& [in, entries] : by_state[s]) {
                (void)entries;
                inputs_of[s].push_back(&in);
            }
    }
};

const ModelTransition* pick_edge(const std::vector<const ModelTransition*>& entries,
                                 const std::string& family, Rng& rng) {
    if (entries.size() == 1) return entries.front();
    if (family_is_stochastic(family)) {
        double r = rng.unit();
        double acc = 0.0;
        for (const ModelTransition* t : entries) {
            acc += t->prob;
            if (r < acc) return t;
        }
        return entries.back();
    }
    return entries[rng.below(entries.size())];
}

std::string flip_output(const std::string& out, const ModelIndex& index, Rng& rng) {
    std::vector<const std::string*> others;
    for (const std::string& candidate : index.output_alphabet)
        if (candidate != out) others.push_back(&candidate);
    if (others.empty()) return out;
    return *others[rng.below(others.size())];
}

void require_generatable(const LearnedModel& model) {
    if (model.family == "iofa")
        throw InvalidConfig("trace generation needs a typed model, not a raw iofa");
    if (model.states.empty()) throw InvalidConfig("model has no states");
}

}  // namespace

TraceSet generate_traces(const LearnedModel& model, const GenerateOptions& options) {
    require_generatable(model);
    if (options.min_length == 0 || options.max_length < options.min_length)
        throw InvalidConfig("trace length range is empty");

    ModelIndex index(model);
    Rng rng(options.seed);
    bool moore = family_is_moore(model.family);
    bool noisy = options.noise_rate > 0.0;

    TraceSet data;
    if (model.family == "Dfa")
        data.kind = TraceKind::labeled_words;
    else if (model.family == "MarkovChain")
        data.kind = TraceKind::observations;
    else
        data.kind = TraceKind::io_traces;

    for (std::uint64_t n = 0; n < options.count; ++n) {
        std::uint32_t length =
            options.min_length +
            static_cast<std::uint32_t>(rng.below(options.max_length - options.min_length + 1));
        std::uint32_t state = model.initial;

        IoTrace trace;
        LabeledWord word;
        std::vector<std::string> observation;
        if (moore && data.kind == TraceKind::io_traces)
            trace.initial = model.states[model.initial].output;
        if (data.kind == TraceKind::observations)
            observation.push_back(model.states[model.initial].output);

        for (std::uint32_t step = 0; step < length; ++step) {
            const auto& inputs = index.inputs_of[state];
            if (inputs.empty())
                throw StructureViolation("trace cannot be extended from a dead-end state",
                                         "extendable", state);
            const std::string& in = *inputs[rng.below(inputs.size())];
            const ModelTransition* edge =
                pick_edge(index.by_state[state].at(in), model.family, rng);
            std::string out = edge->output;
            if (noisy && data.kind != TraceKind::labeled_words && rng.unit() < options.noise_rate)
                out = flip_output(out, index, rng);
            switch (data.kind) {
                case TraceKind::io_traces:
                    trace.steps.emplace_back(in, out);
                    break;
                case TraceKind::labeled_words:
                    word.word.push_back(in);
                    break;
                default:
                    observation.push_back(out);
            }
            state = edge->target;
        }

        switch (data.kind) {
            case TraceKind::io_traces:
                data.io.push_back(std::move(trace));
                break;
            case TraceKind::labeled_words: {
                bool accept = model.states[state].output == "accept";
                if (noisy && rng.unit() < options.noise_rate) accept = !accept;
                word.label = accept ? "1" : "0";
                data.words.push_back(std::move(word));
                break;
            }
            default:
                data.observations.push_back(std::move(observation));
        }
    }
    return data;
}

TraceSet generate_exhaustive(const LearnedModel& model, std::uint32_t max_length) {
    require_generatable(model);
    if (!family_is_deterministic(model.family))
        throw InvalidConfig("exhaustive generation needs a deterministic model");

    ModelIndex index(model);
    std::set<std::string> input_set;
    for (const ModelTransition& t : model.transitions) input_set.insert(t.input);
    std::vector<std::string> alphabet(input_set.begin(), input_set.end());
    if (alphabet.empty()) throw InvalidConfig("model has no transitions");

    bool moore = family_is_moore(model.family);
    TraceSet data;
    data.kind = model.family == "Dfa" ? TraceKind::labeled_words : TraceKind::io_traces;

    std::vector<std::size_t> digits;
    for (std::uint32_t length = 1; length <= max_length; ++length) {
        digits.assign(length, 0);
        for (;;) {
            std::uint32_t state = model.initial;
            IoTrace trace;
            LabeledWord word;
            if (moore && data.kind == TraceKind::io_traces)
                trace.initial = model.states[model.initial].output;
            bool complete = true;
            for (std::size_t k = 0; k < length; ++k) {
                const std::string& in = alphabet[digits[k]];
                auto it = index.by_state[state].find(in);
                if (it == index.by_state[state].end()) {
                    complete = false;
                    break;
                }
                const ModelTransition* edge = it->second.front();
                if (data.kind == TraceKind::io_traces)
                    trace.steps.emplace_back(in, edge->output);
                else
                    word.word.push_back(in);
                state = edge->target;
            }
            if (complete) {
                if (data.kind == TraceKind::io_traces) {
                    data.io.push_back(std::move(trace));
                } else {
                    word.label = model.states[state].output == "accept" ? "1" : "0";
                    data.words.push_back(std::move(word));
                }
            }

            std::size_t pos = length;
            while (pos > 0) {
                if (++digits[pos - 1] < alphabet.size()) break;
                digits[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
    }
    return data;
}

}  // namespace gsm
