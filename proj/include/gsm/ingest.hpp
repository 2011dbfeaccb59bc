#pragma once

#include <string>

#include "gsm/iofa.hpp"
#include "gsm/traces.hpp"

namespace gsm {

// Decides which grammar a raw trace file follows. All three formats are
// tried in a fixed precedence: io-traces (JSON lines), then Abbadingo
// labeled words, then plain observation lines. See parse_traces.
TraceKind detect_format(const std::string& raw);

TraceSet parse_traces(const std::string& raw);                 // auto-detect
TraceSet parse_traces(const std::string& raw, TraceKind kind); // forced

// Canonical text form of a trace set; parse_traces(serialize_traces(t)) is
// content-identical and for generated files byte-identical.
std::string serialize_traces(const TraceSet& data);

// Builds the prefix tree automaton. State ids are assigned in BFS order with
// children visited in textual (input, output) order, so ids coincide with
// the shortlex order of prefixes.
//
// Labeled words build a tree over inputs: edges carry a reserved output
// symbol and the word labels live in the state outputs (inner states stay
// unknown). Observation sequences are treated as Moore traces over a single
// synthetic input, with the first observation as the initial output.
Iofa build_pta(const TraceSet& data, BehaviorConfig config);

// Reserved symbols used by build_pta for the formats above.
inline constexpr const char* kWordEdgeOutput = "#";
inline constexpr const char* kObservationInput = "time";

// Renders a state's PTA prefix like "x/a y/b" (empty prefix: "<initial>"),
// used in diagnostics.
std::string render_prefix(const Iofa& m, StateId id);

}  // namespace gsm
