#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gsm/iofa.hpp"

namespace gsm {

struct ModelState {
    std::uint32_t id = 0;
    std::string output;  // Moore families; empty when absent
};

struct ModelTransition {
    std::uint32_t source = 0;
    std::string input;
    std::string output;
    std::uint32_t target = 0;
    double prob = 1.0;        // stochastic families
    std::uint64_t count = 0;  // family "iofa" only
};

struct LearnedModel {
    std::string family;
    std::uint32_t initial = 0;
    std::vector<ModelState> states;
    std::vector<ModelTransition> transitions;
};

enum class FamilyOverride { none, dfa, markov_chain };

bool family_is_moore(const std::string& family);
bool family_is_stochastic(const std::string& family);
bool family_is_deterministic(const std::string& family);

// Extracts the typed automaton matching the behavior config. States are
// renumbered breadth-first from the initial state; transitions are listed
// in state, input, output order.
LearnedModel to_automaton(const Iofa& m, const BehaviorConfig& behavior,
                          FamilyOverride family_override = FamilyOverride::none,
                          const std::vector<std::string>& accept_symbols = {"1", "true"});

// Serializes the internal representation unconverted, keeping raw counts.
LearnedModel iofa_to_model(const Iofa& m);

std::string model_to_json(const LearnedModel& model);
LearnedModel json_to_model(const std::string& text);

struct StyleOptions {
    std::unordered_map<std::uint32_t, std::string> fill;  // node id -> fill color
};

std::string to_dot(const LearnedModel& model, const StyleOptions& style = {});
std::string to_dot(const Iofa& m, const StyleOptions& style = {});

}  // namespace gsm
