#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gsm {

enum class TraceKind { io_traces, labeled_words, observations };

const char* to_string(TraceKind k);

// One input-output trace. Moore-style traces carry the output observed
// before the first input.
struct IoTrace {
    std::optional<std::string> initial;
    std::vector<std::pair<std::string, std::string>> steps;
};

// One word of a labeled sample: an input sequence with a single label.
struct LabeledWord {
    std::vector<std::string> word;
    std::string label;
};

struct TraceSet {
    TraceKind kind = TraceKind::io_traces;
    std::vector<IoTrace> io;
    std::vector<LabeledWord> words;
    std::vector<std::vector<std::string>> observations;
    // Header of a parsed Abbadingo file (word count, alphabet size), kept so
    // serialization round-trips byte for byte.
    std::optional<std::pair<std::uint64_t, std::uint64_t>> abbadingo_header;

    std::size_t size() const {
        switch (kind) {
            case TraceKind::io_traces: return io.size();
            case TraceKind::labeled_words: return words.size();
            default: return observations.size();
        }
    }

    std::size_t total_symbols() const {
        std::size_t n = 0;
        switch (kind) {
            case TraceKind::io_traces:
                for (const auto& t : io) n += t.steps.size() + (t.initial ? 1 : 0);
                break;
            case TraceKind::labeled_words:
                for (const auto& w : words) n += w.word.size() + 1;
                break;
            default:
                for (const auto& o : observations) n += o.size();
        }
        return n;
    }
};

}  // namespace gsm
