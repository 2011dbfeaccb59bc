#pragma once

#include <cstdint>
#include <functional>

#include "gsm/engine.hpp"

namespace gsm {

struct HoeffdingParams {
    double epsilon = 0.05;
};

struct NoisyParams {
    double error_rate = 0.0;
    double threshold = 0.05;
};

// Always-accept strategy; structural constraints alone decide merges.
MergeStrategy rpni_strategy();

// Evidence count of a candidate: states merged minus classes formed.
std::int64_t edsm_score(const Partition& partition);
MergeStrategy edsm_strategy();

// Hoeffding similarity of two frequency ratios f1/n1 and f2/n2.
// Vacuously true when either sample is empty.
bool hoeffding_compat(std::uint64_t f1, std::uint64_t n1, std::uint64_t f2, std::uint64_t n2,
                      double epsilon);

// Output distributions of the two nodes pass hoeffding_compat for every
// input known to both, over the union of their outputs. Which counts are
// compared (frozen tree counts vs live merged counts) follows from how the
// views were built.
bool ioalergia_compat(const NodeView& a, const NodeView& b, const HoeffdingParams& params);

// Intended to run with compat_on_futures and compat_on_pta enabled.
MergeStrategy ioalergia_strategy(HoeffdingParams params);

// Lifts a pair predicate to a score function: every merged state must be
// compatible with the class that absorbed it. Accept or reject only.
std::function<Score(const Iofa&, const Partition&)> local_to_global_compatibility(
    std::function<bool(const NodeView&, const NodeView&)> compat);

// No local compatibility; instead rechecks ioalergia_compat against whole
// classes with live counts once the candidate partition is known.
MergeStrategy ioalergia_partition_strategy(HoeffdingParams params);

// ioalergia_compat plus a score counting how many pair checks the candidate
// survived. Stateful; reset clears the counter between candidates.
MergeStrategy ioalergia_edsm_strategy(HoeffdingParams params);

// Domain constraint for the car alarm models: access prefixes must agree on
// the parity of "l" and "d" inputs. True when either view has no prefix.
bool parity_compat(const NodeView& a, const NodeView& b);

// Conjoins an extra pair predicate onto a strategy's local compatibility.
MergeStrategy with_extra_compat(MergeStrategy base,
                                std::function<bool(const NodeView&, const NodeView&)> extra);

// P(X >= k) for X ~ Binomial(n, p), exact summation in log space.
double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p);

// Pools every class's non-dominant output counts, net of the mismatches the
// member states already carry, into one binomial test: reject when that much
// new noise is implausible at the given threshold, otherwise score by the
// tail probability.
Score noisy_nd_score(const Iofa& m, const Partition& partition, const NoisyParams& params);
MergeStrategy noisy_strategy(NoisyParams params);

// Keeps only the dominant output per state and input (ties to the textually
// smallest output), then drops states that became unreachable.
void dominant_output_postprocess(Iofa& m);

}  // namespace gsm
