#include "gsm/extract.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gsm/errors.hpp"

namespace gsm {

namespace {

using nlohmann::json;

constexpr const char* kFamilies[] = {"MooreMachine",      "Dfa",  "NDMooreMachine",
                                     "Mdp",               "MarkovChain", "MealyMachine",
                                     "Onfsm",             "StochasticMealyMachine", "iofa"};

bool known_family(const std::string& f) {
    return std::find(std::begin(kFamilies), std::end(kFamilies), f) != std::end(kFamilies);
}

std::string family_of(const BehaviorConfig& behavior, FamilyOverride over) {
    if (over == FamilyOverride::dfa) return "Dfa";
    if (over == FamilyOverride::markov_chain) return "MarkovChain";
    bool moore = behavior.output_behavior == OutputBehavior::moore;
    switch (behavior.transition_behavior) {
        case TransitionBehavior::deterministic:
            return moore ? "MooreMachine" : "MealyMachine";
        case TransitionBehavior::nondeterministic:
            return moore ? "NDMooreMachine" : "Onfsm";
        case TransitionBehavior::stochastic:
        default:
            return moore ? "Mdp" : "StochasticMealyMachine";
    }
}

// Breadth-first numbering of live states; inputs and outputs in interned
// (textual) order keep the result canonical.
std::vector<StateId> bfs_order(const Iofa& m) {
    std::vector<StateId> order{m.initial()};
    std::unordered_map<StateId, std::uint32_t> seen{{m.initial(), 0}};
    for (std::size_t k = 0; k < order.size(); ++k) {
        for (const auto& [in, outs] : m.state(order[k]).transitions) {
            (void)in;
            for (const auto& [out, rec] : outs) {
                (void)out;
                StateId t = m.find(rec.target);
                if (seen.emplace(t, static_cast<std::uint32_t>(order.size())).second)
                    order.push_back(t);
            }
        }
    }
    return order;
}

StateId deterministic_witness(const Iofa& m) {
    for (StateId id : m.live_states())
        for (const auto& [in, outs] : m.state(id).transitions) {
            (void)in;
            if (outs.size() > 1) return id;
        }
    return kNoState;
}

StateId moore_witness(const Iofa& m) {
    std::unordered_map<StateId, Symbol> incoming;
    if (m.initial_output().valid()) incoming.emplace(m.initial(), m.initial_output());
    for (StateId id : m.live_states())
        for (const auto& [in, outs] : m.state(id).transitions) {
            (void)in;
            for (const auto& [out, rec] : outs) {
                StateId t = m.find(rec.target);
                auto [it, fresh] = incoming.emplace(t, out);
                if (!fresh && it->second != out) return t;
            }
        }
    return kNoState;
}

std::string format_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", p);
    return buf;
}

std::string escape_dot(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

bool family_is_moore(const std::string& family) {
    return family == "MooreMachine" || family == "Dfa" || family == "NDMooreMachine" ||
           family == "Mdp" || family == "MarkovChain";
}

bool family_is_stochastic(const std::string& family) {
    return family == "Mdp" || family == "MarkovChain" || family == "StochasticMealyMachine";
}

bool family_is_deterministic(const std::string& family) {
    return family == "MooreMachine" || family == "Dfa" || family == "MealyMachine";
}

LearnedModel to_automaton(const Iofa& m, const BehaviorConfig& behavior,
                          FamilyOverride family_override,
                          const std::vector<std::string>& accept_symbols) {
    if (family_override == FamilyOverride::dfa &&
        (behavior.output_behavior != OutputBehavior::moore ||
         behavior.transition_behavior != TransitionBehavior::deterministic))
        throw InvalidConfig("a dfa requires moore outputs and deterministic transitions");
    if (family_override == FamilyOverride::markov_chain &&
        (behavior.output_behavior != OutputBehavior::moore ||
         behavior.transition_behavior != TransitionBehavior::stochastic))
        throw InvalidConfig("a markov chain requires moore outputs and stochastic transitions");

    if (behavior.transition_behavior == TransitionBehavior::deterministic &&
        !is_deterministic(m))
        throw StructureViolation("model has two outputs for one state and input",
                                 "is_deterministic", deterministic_witness(m));
    if (behavior.output_behavior == OutputBehavior::moore && !is_moore(m))
        throw StructureViolation("state is entered with conflicting outputs", "is_moore",
                                 moore_witness(m));

    LearnedModel model;
    model.family = family_of(behavior, family_override);
    bool moore = family_is_moore(model.family);
    bool stochastic = family_is_stochastic(model.family);

    auto order = bfs_order(m);
    std::unordered_map<StateId, std::uint32_t> number;
    for (std::uint32_t i = 0; i < order.size(); ++i) number.emplace(order[i], i);
    model.initial = 0;

    auto accepts = [&](const std::string& text) {
        return std::find(accept_symbols.begin(), accept_symbols.end(), text) !=
               accept_symbols.end();
    };

    for (std::uint32_t i = 0; i < order.size(); ++i) {
        ModelState st;
        st.id = i;
        if (moore) {
            Symbol out = m.state(order[i]).state_output;
            std::string text = out.valid() ? m.outputs().text(out) : std::string("unknown");
            if (model.family == "Dfa") text = accepts(text) ? "accept" : "reject";
            st.output = text;
        }
        model.states.push_back(std::move(st));
    }

    Symbol single_input;
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        for (const auto& [in, outs] : m.state(order[i]).transitions) {
            if (outs.empty()) continue;
            if (model.family == "MarkovChain") {
                if (!single_input.valid()) single_input = in;
                if (in != single_input)
                    throw StructureViolation("markov chain uses more than one input symbol",
                                             "single_input", order[i]);
            }
            std::uint64_t total = 0;
            for (const auto& [out, rec] : outs) {
                (void)out;
                total += rec.count;
            }
            for (const auto& [out, rec] : outs) {
                ModelTransition t;
                t.source = i;
                t.input = m.inputs().text(in);
                t.target = number.at(m.find(rec.target));
                // Moore families take the output from the target state; this
                // also hides the placeholder edge symbol of word-shaped data.
                t.output = moore ? model.states[t.target].output : m.outputs().text(out);
                if (stochastic)
                    t.prob = static_cast<double>(rec.count) / static_cast<double>(total);
                model.transitions.push_back(std::move(t));
            }
        }
    }
    return model;
}

LearnedModel iofa_to_model(const Iofa& m) {
    LearnedModel model;
    model.family = "iofa";
    auto order = bfs_order(m);
    std::unordered_map<StateId, std::uint32_t> number;
    for (std::uint32_t i = 0; i < order.size(); ++i) number.emplace(order[i], i);
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        ModelState st;
        st.id = i;
        Symbol out = m.state(order[i]).state_output;
        if (out.valid()) st.output = m.outputs().text(out);
        model.states.push_back(std::move(st));
    }
    for (std::uint32_t i = 0; i < order.size(); ++i) {
        for (const auto& [in, outs] : m.state(order[i]).transitions) {
            for (const auto& [out, rec] : outs) {
                ModelTransition t;
                t.source = i;
                t.input = m.inputs().text(in);
                t.output = m.outputs().text(out);
                t.target = number.at(m.find(rec.target));
                t.count = rec.count;
                model.transitions.push_back(std::move(t));
            }
        }
    }
    return model;
}

namespace {

void validate_model(const LearnedModel& model) {
    if (!known_family(model.family)) throw SchemaError("unknown family", "family");
    for (std::uint32_t i = 0; i < model.states.size(); ++i)
        if (model.states[i].id != i)
            throw SchemaError("state ids must be consecutive from 0",
                              "states[" + std::to_string(i) + "].id");
    if (model.states.empty()) throw SchemaError("model needs at least one state", "states");
    if (model.initial >= model.states.size())
        throw SchemaError("initial state does not exist", "initial");
    if (model.family == "Dfa")
        for (std::uint32_t i = 0; i < model.states.size(); ++i)
            if (model.states[i].output != "accept" && model.states[i].output != "reject")
                throw SchemaError("dfa output must be accept or reject",
                                  "states[" + std::to_string(i) + "].output");

    std::set<std::pair<std::uint32_t, std::string>> det_seen;
    std::map<std::pair<std::uint32_t, std::string>, double> sums;
    std::string single_input;
    for (std::uint32_t i = 0; i < model.transitions.size(); ++i) {
        const ModelTransition& t = model.transitions[i];
        std::string path = "transitions[" + std::to_string(i) + "]";
        if (t.source >= model.states.size())
            throw SchemaError("unknown source state", path + ".source");
        if (t.target >= model.states.size())
            throw SchemaError("unknown target state", path + ".target");
        if (t.input.empty()) throw SchemaError("missing input symbol", path + ".input");
        if (t.output.empty()) throw SchemaError("missing output symbol", path + ".output");
        if (family_is_moore(model.family) && model.states[t.target].output != t.output)
            throw SchemaError("transition output differs from target state output",
                              path + ".output");
        if (family_is_deterministic(model.family) &&
            !det_seen.insert({t.source, t.input}).second)
            throw SchemaError("two transitions for one state and input", path);
        if (family_is_stochastic(model.family)) {
            if (t.prob < 0.0 || t.prob > 1.0)
                throw SchemaError("probability out of range", path + ".prob");
            sums[{t.source, t.input}] += t.prob;
        }
        if (model.family == "MarkovChain") {
            if (single_input.empty()) single_input = t.input;
            if (t.input != single_input)
                throw SchemaError("markov chain uses more than one input symbol",
                                  path + ".input");
        }
    }
    for (const auto& [key, sum] : sums)
        if (std::abs(sum - 1.0) > 1e-9)
            throw SchemaError("distribution for state " + std::to_string(key.first) +
                                  " input " + key.second + " sums to " + std::to_string(sum),
                              "transitions");
}

}  // namespace

std::string model_to_json(const LearnedModel& model) {
    validate_model(model);
    json doc;
    doc["family"] = model.family;
    doc["initial"] = model.initial;
    json states = json::array();
    for (const ModelState& st : model.states) {
        json s;
        s["id"] = st.id;
        if (!st.output.empty()) s["output"] = st.output;
        states.push_back(std::move(s));
    }
    doc["states"] = std::move(states);
    json transitions = json::array();
    for (const ModelTransition& t : model.transitions) {
        json e;
        e["source"] = t.source;
        e["input"] = t.input;
        e["output"] = t.output;
        e["target"] = t.target;
        if (family_is_stochastic(model.family)) e["prob"] = t.prob;
        if (model.family == "iofa") e["count"] = t.count;
        transitions.push_back(std::move(e));
    }
    doc["transitions"] = std::move(transitions);
    return doc.dump(2) + "\n";
}

LearnedModel json_to_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("invalid json: ") + e.what(), "");
    }
    auto need = [&](const json& node, const char* key, const std::string& path) -> const json& {
        if (!node.is_object() || !node.contains(key))
            throw SchemaError("missing field", path.empty() ? key : path + "." + key);
        return node.at(key);
    };

    LearnedModel model;
    try {
        model.family = need(doc, "family", "").get<std::string>();
        model.initial = need(doc, "initial", "").get<std::uint32_t>();
        const json& states = need(doc, "states", "");
        if (!states.is_array()) throw SchemaError("states must be an array", "states");
        for (std::size_t i = 0; i < states.size(); ++i) {
            std::string path = "states[" + std::to_string(i) + "]";
            ModelState st;
            st.id = need(states[i], "id", path).get<std::uint32_t>();
            if (states[i].contains("output")) st.output = states[i]["output"].get<std::string>();
            model.states.push_back(std::move(st));
        }
        const json& transitions = need(doc, "transitions", "");
        if (!transitions.is_array())
            throw SchemaError("transitions must be an array", "transitions");
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            std::string path = "transitions[" + std::to_string(i) + "]";
            ModelTransition t;
            t.source = need(transitions[i], "source", path).get<std::uint32_t>();
            t.input = need(transitions[i], "input", path).get<std::string>();
            t.output = need(transitions[i], "output", path).get<std::string>();
            t.target = need(transitions[i], "target", path).get<std::uint32_t>();
            if (transitions[i].contains("prob")) t.prob = transitions[i]["prob"].get<double>();
            if (transitions[i].contains("count"))
                t.count = transitions[i]["count"].get<std::uint64_t>();
            model.transitions.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed field: ") + e.what(), "");
    }
    validate_model(model);
    return model;
}

std::string to_dot(const LearnedModel& model, const StyleOptions& style) {
    std::ostringstream out;
    out << "digraph {\n";
    out << "  __start [shape=none,label=\"\"];\n";
    out << "  __start -> s" << model.initial << ";\n";
    bool moore = family_is_moore(model.family);
    for (const ModelState& st : model.states) {
        out << "  s" << st.id << " [label=\"" << st.id;
        if ((moore || model.family == "iofa") && !st.output.empty())
            out << "|" << escape_dot(st.output);
        out << "\"";
        auto fill = style.fill.find(st.id);
        if (fill != style.fill.end())
            out << ",style=filled,fillcolor=\"" << escape_dot(fill->second) << "\"";
        out << "];\n";
    }
    for (const ModelTransition& t : model.transitions) {
        out << "  s" << t.source << " -> s" << t.target << " [label=\""
            << escape_dot(t.input) << "/" << escape_dot(t.output);
        if (family_is_stochastic(model.family)) out << ":" << format_prob(t.prob);
        if (model.family == "iofa") out << ":" << t.count;
        out << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

std::string to_dot(const Iofa& m, const StyleOptions& style) {
    return to_dot(iofa_to_model(m), style);
}

}  // namespace gsm
