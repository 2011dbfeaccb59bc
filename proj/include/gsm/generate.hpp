#pragma once

#include <cstdint>

#include "gsm/extract.hpp"
#include "gsm/traces.hpp"

namespace gsm {

struct GenerateOptions {
    std::uint64_t count = 0;
    std::uint32_t min_length = 1;
    std::uint32_t max_length = 1;
    std::uint64_t seed = 0;
    double noise_rate = 0.0;  // per-step chance of flipping an output symbol
};

// Samples traces from a reference model: trace lengths and inputs uniformly
// at random (inputs among those available in the current state), outputs by
// the model's own choice or distribution. The trace kind follows the model
// family. Identical seeds give identical traces on every platform.
TraceSet generate_traces(const LearnedModel& model, const GenerateOptions& options);

// Replays every input word of length 1..max_length; deterministic families
// only. Words that run into a missing transition are skipped.
TraceSet generate_exhaustive(const LearnedModel& model, std::uint32_t max_length);

}  // namespace gsm
