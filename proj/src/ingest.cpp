#include "gsm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "gsm/errors.hpp"

namespace gsm {

namespace {

using nlohmann::json;

const char* to_cstring(TraceKind k) {
    switch (k) {
        case TraceKind::io_traces: return "io-traces";
        case TraceKind::labeled_words: return "abbadingo";
        default: return "observations";
    }
}

std::vector<std::string_view> split_lines(const std::string& raw) {
    std::vector<std::string_view> lines;
    std::string_view rest = raw;
    while (!rest.empty()) {
        auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        rest.remove_prefix(nl + 1);
    }
    return lines;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::vector<std::string> tokens_of(std::string_view line) {
    std::vector<std::string> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) toks.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

bool is_uint(const std::string& tok) {
    if (tok.empty()) return false;
    return std::all_of(tok.begin(), tok.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

TraceSet parse_io_traces(const std::string& raw) {
    TraceSet out;
    out.kind = TraceKind::io_traces;
    std::size_t line_no = 0;
    for (auto line : split_lines(raw)) {
        ++line_no;
        if (is_blank(line)) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw UnparseableInput("line " + std::to_string(line_no) +
                                   " is not valid JSON: " + e.what());
        }
        if (!doc.is_array())
            throw UnparseableInput("line " + std::to_string(line_no) +
                                   ": expected a JSON array of steps");
        IoTrace trace;
        for (std::size_t k = 0; k < doc.size(); ++k) {
            const json& elem = doc[k];
            if (elem.is_string()) {
                if (k != 0)
                    throw UnparseableInput("line " + std::to_string(line_no) +
                                           ": initial output must be the first element");
                trace.initial = elem.get<std::string>();
                continue;
            }
            if (!elem.is_array() || elem.size() != 2 || !elem[0].is_string() ||
                !elem[1].is_string())
                throw UnparseableInput("line " + std::to_string(line_no) +
                                       ": step " + std::to_string(k) +
                                       " is not an [input, output] pair of strings");
            trace.steps.emplace_back(elem[0].get<std::string>(), elem[1].get<std::string>());
        }
        out.io.push_back(std::move(trace));
    }
    if (out.io.empty()) throw UnparseableInput("no traces found");
    return out;
}

TraceSet parse_abbadingo(const std::string& raw) {
    TraceSet out;
    out.kind = TraceKind::labeled_words;
    bool saw_header = false;
    std::size_t line_no = 0;
    for (auto line : split_lines(raw)) {
        ++line_no;
        if (is_blank(line)) continue;
        auto toks = tokens_of(line);
        if (!saw_header) {
            if (toks.size() != 2 || !is_uint(toks[0]) || !is_uint(toks[1]))
                throw UnparseableInput("line " + std::to_string(line_no) +
                                       ": expected header '<num_words> <alphabet_size>'");
            out.abbadingo_header = {std::stoull(toks[0]), std::stoull(toks[1])};
            saw_header = true;
            continue;
        }
        if (toks.size() < 2 || (toks[0] != "0" && toks[0] != "1") || !is_uint(toks[1]))
            throw UnparseableInput("line " + std::to_string(line_no) +
                                   ": expected '<label> <len> <symbols...>' with label 0 or 1");
        std::size_t len = std::stoull(toks[1]);
        if (toks.size() != len + 2)
            throw UnparseableInput("line " + std::to_string(line_no) + ": declared length " +
                                   std::to_string(len) + " but found " +
                                   std::to_string(toks.size() - 2) + " symbols");
        LabeledWord w;
        w.label = toks[0];
        for (std::size_t k = 2; k < toks.size(); ++k) {
            if (!is_uint(toks[k]))
                throw UnparseableInput("line " + std::to_string(line_no) +
                                       ": symbols must be non-negative integers");
            w.word.push_back(toks[k]);
        }
        out.words.push_back(std::move(w));
    }
    if (!saw_header) throw UnparseableInput("no traces found");
    return out;
}

TraceSet parse_observations(const std::string& raw) {
    TraceSet out;
    out.kind = TraceKind::observations;
    std::size_t line_no = 0;
    for (auto line : split_lines(raw)) {
        ++line_no;
        if (is_blank(line)) continue;
        // A line that looks like JSON almost certainly is a broken io-trace;
        // refusing here gives a usable diagnostic instead of a bogus model.
        auto first = line.find_first_not_of(" \t");
        if (line[first] == '[')
            throw UnparseableInput("line " + std::to_string(line_no) +
                                   " looks like an io-trace line but did not parse as one");
        out.observations.push_back(tokens_of(line));
    }
    if (out.observations.empty()) throw UnparseableInput("no traces found");
    return out;
}

}  // namespace

const char* to_string(TraceKind k) { return to_cstring(k); }

TraceKind detect_format(const std::string& raw) {
    try {
        parse_io_traces(raw);
        return TraceKind::io_traces;
    } catch (const UnparseableInput&) {
    }
    try {
        parse_abbadingo(raw);
        return TraceKind::labeled_words;
    } catch (const UnparseableInput&) {
    }
    parse_observations(raw);
    return TraceKind::observations;
}

TraceSet parse_traces(const std::string& raw, TraceKind kind) {
    switch (kind) {
        case TraceKind::io_traces: return parse_io_traces(raw);
        case TraceKind::labeled_words: return parse_abbadingo(raw);
        default: return parse_observations(raw);
    }
}

TraceSet parse_traces(const std::string& raw) {
    return parse_traces(raw, detect_format(raw));
}

std::string serialize_traces(const TraceSet& data) {
    std::string out;
    switch (data.kind) {
        case TraceKind::io_traces:
            for (const auto& t : data.io) {
                json line = json::array();
                if (t.initial) line.push_back(*t.initial);
                for (const auto& [i, o] : t.steps) line.push_back(json::array({i, o}));
                out += line.dump();
                out += '\n';
            }
            break;
        case TraceKind::labeled_words: {
            std::uint64_t words = data.words.size();
            std::uint64_t alphabet = 0;
            if (data.abbadingo_header) {
                words = data.abbadingo_header->first;
                alphabet = data.abbadingo_header->second;
            } else {
                std::set<std::string> syms;
                for (const auto& w : data.words) syms.insert(w.word.begin(), w.word.end());
                alphabet = syms.size();
            }
            out += std::to_string(words) + " " + std::to_string(alphabet) + "\n";
            for (const auto& w : data.words) {
                out += w.label + " " + std::to_string(w.word.size());
                for (const auto& s : w.word) {
                    out += ' ';
                    out += s;
                }
                out += '\n';
            }
            break;
        }
        default:
            for (const auto& obs : data.observations) {
                for (std::size_t k = 0; k < obs.size(); ++k) {
                    if (k) out += ' ';
                    out += obs[k];
                }
                out += '\n';
            }
    }
    return out;
}

std::string render_prefix(const Iofa& m, StateId id) {
    auto path = m.prefix(id);
    if (path.empty()) return "<initial>";
    std::string out;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (k) out += ' ';
        out += m.inputs().text(path[k].first);
        out += '/';
        out += m.outputs().text(path[k].second);
    }
    return out;
}

namespace {

// Rebuilds the tree with ids assigned in BFS order; children are visited in
// textual (input, output) order because symbol ids are textual ranks.
Iofa renumber_bfs(const Iofa& prov) {
    Iofa out;
    out.inputs() = prov.inputs();
    out.outputs() = prov.outputs();
    out.set_initial_output(prov.initial_output());
    out.state(0).state_output = prov.state(0).state_output;

    std::vector<StateId> old_of{0};
    for (StateId n = 0; n < old_of.size(); ++n) {
        for (const auto& [in, outs] : prov.state(old_of[n]).transitions) {
            for (const auto& [o, rec] : outs) {
                StateId child = out.add_state(n, in, o);
                out.state(child).state_output = prov.state(rec.target).state_output;
                out.state(n).transitions.obtain(in).obtain(o) =
                    TransitionInfo{child, child, rec.count, rec.count};
                old_of.push_back(rec.target);
            }
        }
    }
    out.mark_canonical_ids();
    return out;
}

Iofa build_io(const std::vector<IoTrace>& traces, BehaviorConfig config) {
    bool moore = config.output_behavior == OutputBehavior::moore;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        if (moore && !traces[k].initial)
            throw InconsistentInitialOutput("trace " + std::to_string(k + 1) +
                                            " carries no initial output");
        if (!moore && traces[k].initial)
            throw InvalidConfig("trace " + std::to_string(k + 1) +
                                " carries an initial output but output behavior is mealy");
        if (moore && traces[k].initial != traces[0].initial)
            throw InconsistentInitialOutput("trace " + std::to_string(k + 1) +
                                            " starts with output '" + *traces[k].initial +
                                            "' but trace 1 starts with '" + *traces[0].initial +
                                            "'");
    }

    std::set<std::string> in_syms, out_syms;
    for (const auto& t : traces) {
        if (t.initial) out_syms.insert(*t.initial);
        for (const auto& [i, o] : t.steps) {
            in_syms.insert(i);
            out_syms.insert(o);
        }
    }

    Iofa prov;
    for (const auto& s : in_syms) prov.inputs().intern(s);
    for (const auto& s : out_syms) prov.outputs().intern(s);
    if (moore && !traces.empty()) {
        Symbol o0 = prov.outputs().lookup(*traces[0].initial);
        prov.set_initial_output(o0);
        prov.state(0).state_output = o0;
    }

    bool det = config.transition_behavior == TransitionBehavior::deterministic;
    for (const auto& t : traces) {
        StateId cur = 0;
        for (const auto& [i, o] : t.steps) {
            Symbol in = prov.inputs().lookup(i);
            Symbol out = prov.outputs().lookup(o);
            OutMap& outs = prov.state(cur).transitions.obtain(in);
            if (TransitionInfo* rec = outs.find(out)) {
                ++rec->count;
                ++rec->original_count;
                cur = rec->target;
                continue;
            }
            if (det && !outs.empty())
                throw NondeterminismInData(
                    "input '" + i + "' after prefix [" + render_prefix(prov, cur) +
                        "] emits both '" + prov.outputs().text(outs.begin()->first) +
                        "' and '" + o + "'",
                    render_prefix(prov, cur));
            StateId child = prov.add_state(cur, in, out);
            prov.state(cur).transitions.obtain(in).obtain(out) =
                TransitionInfo{child, child, 1, 1};
            cur = child;
        }
    }
    return renumber_bfs(prov);
}

Iofa build_words(const std::vector<LabeledWord>& words) {
    std::set<std::string> in_syms;
    std::set<std::string> out_syms{kWordEdgeOutput};
    for (const auto& w : words) {
        in_syms.insert(w.word.begin(), w.word.end());
        out_syms.insert(w.label);
    }

    Iofa prov;
    for (const auto& s : in_syms) prov.inputs().intern(s);
    for (const auto& s : out_syms) prov.outputs().intern(s);
    Symbol edge_out = prov.outputs().lookup(kWordEdgeOutput);
    prov.state(0).state_output = Symbol{};

    for (const auto& w : words) {
        StateId cur = 0;
        for (const auto& i : w.word) {
            Symbol in = prov.inputs().lookup(i);
            OutMap& outs = prov.state(cur).transitions.obtain(in);
            if (TransitionInfo* rec = outs.find(edge_out)) {
                ++rec->count;
                ++rec->original_count;
                cur = rec->target;
                continue;
            }
            StateId child = prov.add_state(cur, in, edge_out);
            prov.state(child).state_output = Symbol{};
            prov.state(cur).transitions.obtain(in).obtain(edge_out) =
                TransitionInfo{child, child, 1, 1};
            cur = child;
        }
        Symbol label = prov.outputs().lookup(w.label);
        Symbol& slot = prov.state(cur).state_output;
        if (slot.valid() && slot != label) {
            std::string rendered;
            for (const auto& s : w.word) rendered += rendered.empty() ? s : " " + s;
            throw ConflictingLabels("word [" + rendered + "] is labeled both '" +
                                    prov.outputs().text(slot) + "' and '" + w.label + "'");
        }
        slot = label;
    }
    return renumber_bfs(prov);
}

}  // namespace

Iofa build_pta(const TraceSet& data, BehaviorConfig config) {
    switch (data.kind) {
        case TraceKind::io_traces:
            return build_io(data.io, config);
        case TraceKind::labeled_words:
            if (config.output_behavior != OutputBehavior::moore ||
                config.transition_behavior != TransitionBehavior::deterministic)
                throw InvalidConfig(
                    "labeled words require moore output and deterministic transitions");
            return build_words(data.words);
        default: {
            if (config.transition_behavior != TransitionBehavior::stochastic)
                throw InvalidConfig("observation sequences require stochastic transitions");
            if (config.output_behavior != OutputBehavior::moore)
                throw InvalidConfig("observation sequences require moore output behavior");
            std::vector<IoTrace> io;
            io.reserve(data.observations.size());
            for (const auto& obs : data.observations) {
                IoTrace t;
                t.initial = obs[0];
                for (std::size_t k = 1; k < obs.size(); ++k)
                    t.steps.emplace_back(kObservationInput, obs[k]);
                io.push_back(std::move(t));
            }
            return build_io(io, config);
        }
    }
}

}  // namespace gsm
